#include "axflow/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <new>

#include "axflow/grid.hpp"
#include "axflow/pipeline.hpp"
#include "axflow/rng.hpp"
#include "axflow/types.hpp"

namespace axflow {

std::string bench_csv_header() {
    return "h,w,d,cells,allpairs_elems,factorized_elems,allpairs_bytes,factorized_bytes,"
           "predicted_peak,measured_peak,build_time_ms,status\n";
}

std::string bench_csv_row(const BenchRecord& r) {
    char line[512];
    std::snprintf(line, sizeof(line), "%d,%d,%d,%zu,%zu,%zu,%zu,%zu,%zu,%zu,%.3f,%s\n", r.h, r.w,
                  r.d, r.cells, r.allpairs_elems, r.factorized_elems, r.allpairs_bytes,
                  r.factorized_bytes, r.predicted_peak, r.measured_peak, r.build_time_ms,
                  r.status.c_str());
    return line;
}

BenchRecord analytic_record(int h, int w, int d) {
    if (h <= 0 || w <= 0 || d <= 0) throw ValueError("analytic_record: non-positive extents");
    BenchRecord r;
    r.h = h;
    r.w = w;
    r.d = d;
    r.cells = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    r.allpairs_elems = r.cells * r.cells;
    r.factorized_elems = r.cells * (static_cast<std::size_t>(h) + static_cast<std::size_t>(w));
    r.allpairs_bytes = r.allpairs_elems * sizeof(float);
    r.factorized_bytes = r.factorized_elems * sizeof(float);
    r.predicted_peak = predicted_peak_bytes(h, w, d);
    return r;
}

BenchRecord measured_record(int h, int w, int d, std::uint64_t seed) {
    BenchRecord r = analytic_record(h, w, d);
    try {
        Rng rng(seed);
        FeatureMap f1{Grid({h, w, d})};
        FeatureMap f2{Grid({h, w, d})};
        rng.fill_unit_features(f1.values);
        rng.fill_unit_features(f2.values);
        VolumeWeights vw = random_volume_weights(d, seed + 100);

        const std::size_t feature_bytes = 2 * f1.values.size() * sizeof(float);
        mem::reset_peak();
        const std::size_t baseline = mem::current_bytes();
        const auto t0 = std::chrono::steady_clock::now();
        CostVolumePair vols = build_cost_volumes(f1, f2, vw);
        const auto t1 = std::chrono::steady_clock::now();
        // Rise above the pre-build level, with the two input maps added back
        // so the figure matches predicted_peak_bytes's baseline.
        r.measured_peak = mem::peak_bytes() - baseline + feature_bytes;
        r.build_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        r.status = "ok";
        vols.horizontal.values.release();
        vols.vertical.values.release();
    } catch (const std::bad_alloc&) {
        r.status = "oom";
    } catch (const CapError&) {
        r.status = "oom";
    }
    return r;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ValueError("fit_loglog_slope: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0) throw ValueError("fit_loglog_slope: non-positive point");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw ValueError("fit_loglog_slope: degenerate x values");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace axflow
