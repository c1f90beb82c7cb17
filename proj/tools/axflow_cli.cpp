#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "axflow/bench.hpp"
#include "axflow/featurize.hpp"
#include "axflow/grid.hpp"
#include "axflow/metrics_io.hpp"
#include "axflow/oracle.hpp"
#include "axflow/pipeline.hpp"
#include "axflow/regression.hpp"
#include "axflow/rng.hpp"
#include "axflow/types.hpp"
#include "axflow/weights_io.hpp"

namespace {

axflow::ImageGray load_image_auto(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw axflow::IoError("cannot open " + path);
    char magic[2] = {0, 0};
    is.read(magic, 2);
    is.close();
    if (magic[0] == 'P' && magic[1] == '6') return axflow::read_ppm(path);
    if (magic[0] == 'P' && magic[1] == '5') return axflow::read_pgm(path);
    throw axflow::ParseError(path + ": not a binary PNM image");
}

bool parse_shift(const std::string& text, int& dx, int& dy) {
    int consumed = 0;
    if (std::sscanf(text.c_str(), "%d,%d%n", &dx, &dy, &consumed) != 2) return false;
    return consumed == static_cast<int>(text.size());
}

std::vector<std::pair<int, int>> parse_grids(const std::string& text) {
    std::vector<std::pair<int, int>> grids;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(',', pos);
        if (next == std::string::npos) next = text.size();
        const std::string item = text.substr(pos, next - pos);
        int h = 0, w = 0, consumed = 0;
        if (std::sscanf(item.c_str(), "%dx%d%n", &h, &w, &consumed) != 2 ||
            consumed != static_cast<int>(item.size()) || h <= 0 || w <= 0)
            throw axflow::ValueError("bad grid '" + item + "', expected HxW");
        grids.emplace_back(h, w);
        pos = next + 1;
    }
    if (grids.empty()) throw axflow::ValueError("empty grid list");
    return grids;
}

struct EstimateOpts {
    std::string img1, img2, feat1, feat2, weights, out, viz, gt, report;
    std::string solver = "gru";
    std::string oracle_shift;
    int radius = 32;
    int iters = 12;
    int d = 64;
    int threads = 1;
    std::uint64_t seed = 0;
    double tau = 0.01;
};

struct LoadedPair {
    axflow::FeatureMap f1, f2;
    bool from_images = false;
};

LoadedPair load_pair(const EstimateOpts& o) {
    LoadedPair p;
    const bool images = !o.img1.empty() || !o.img2.empty();
    const bool feats = !o.feat1.empty() || !o.feat2.empty();
    if (images == feats)
        throw axflow::ValueError("provide exactly one input pair: --img1/--img2 or --feat1/--feat2");
    if (images) {
        if (o.img1.empty() || o.img2.empty())
            throw axflow::ValueError("both --img1 and --img2 are required");
        p.f1 = axflow::featurize_image(load_image_auto(o.img1), o.d);
        p.f2 = axflow::featurize_image(load_image_auto(o.img2), o.d);
        p.from_images = true;
    } else {
        if (o.feat1.empty() || o.feat2.empty())
            throw axflow::ValueError("both --feat1 and --feat2 are required");
        p.f1 = axflow::load_features(o.feat1);
        p.f2 = axflow::load_features(o.feat2);
    }
    if (!p.f1.values.same_dims(p.f2.values))
        throw axflow::ShapeError("input extents differ: " + axflow::dims_to_string(p.f1.values.dims()) +
                                 " vs " + axflow::dims_to_string(p.f2.values.dims()));
    return p;
}

int run_estimate(const EstimateOpts& o) {
    axflow::set_threads(o.threads);
    if (o.solver != "gru" && o.solver != "softargmax")
        throw axflow::ValueError("unknown solver '" + o.solver + "'");
    if (o.radius <= 0) throw axflow::ValueError("--radius must be positive");
    if (o.iters <= 0) throw axflow::ValueError("--iters must be positive");

    LoadedPair pair = load_pair(o);
    const int h = pair.f1.h(), w = pair.f1.w(), d = pair.f1.d();
    std::cout << "estimate: features " << h << "x" << w << "x" << d << "\n";

    int dx = 0, dy = 0;
    const bool oracle = !o.oracle_shift.empty();
    if (oracle && !parse_shift(o.oracle_shift, dx, dy))
        throw axflow::ValueError("bad --oracle-shift '" + o.oracle_shift + "', expected dx,dy");

    axflow::WeightSet set;
    if (!o.weights.empty()) set = axflow::load_weights(o.weights);

    std::string mode;
    axflow::CostVolumePair volumes;
    if (oracle) {
        mode = "oracle";
        volumes = axflow::build_cost_volumes_oracle(pair.f1, pair.f2, dx, dy);
    } else if (!o.weights.empty() || o.solver == "gru") {
        mode = "learned";
        axflow::VolumeWeights vw = !o.weights.empty() ? axflow::volume_weights_from_set(set)
                                                      : axflow::random_volume_weights(d, o.seed);
        volumes = axflow::build_cost_volumes(pair.f1, pair.f2, vw);
    } else {
        mode = "identity";
        volumes = axflow::build_cost_volumes_identity(pair.f1, pair.f2);
    }
    std::cout << "estimate: mode " << mode << " solver " << o.solver << "\n";
    std::cout << "estimate: volume elements "
              << volumes.horizontal.values.size() + volumes.vertical.values.size() << "\n";

    axflow::FlowField flow;
    if (o.solver == "gru") {
        axflow::RegressionWeights reg =
            !o.weights.empty() ? axflow::regression_from_set(set)
                               : axflow::random_model_weights(d, o.radius, o.seed).regression;
        std::vector<axflow::FlowField> flows =
            axflow::iterate(pair.f1, volumes.horizontal, volumes.vertical, reg, o.iters, o.radius);
        flow = std::move(flows.back());
    } else {
        const axflow::FlowField zero = axflow::FlowField::zeros(h, w);
        axflow::LookupSlab hs = axflow::lookup(volumes.horizontal, zero, o.radius);
        axflow::LookupSlab vs = axflow::lookup(volumes.vertical, zero, o.radius);
        flow = axflow::softargmax_flow(hs, vs, static_cast<float>(o.tau));
    }
    volumes.horizontal.values.release();
    volumes.vertical.values.release();

    if (pair.from_images) {
        flow = axflow::upsample_flow(flow, axflow::kFeatureScale);
        std::cout << "estimate: search radius " << o.radius << " cells, +-"
                  << o.radius * axflow::kFeatureScale << " px at image scale\n";
    }

    double mu = 0.0, mv = 0.0;
    for (int y = 0; y < flow.h(); ++y)
        for (int x = 0; x < flow.w(); ++x) {
            mu += std::abs(static_cast<double>(flow.values(y, x, 0)));
            mv += std::abs(static_cast<double>(flow.values(y, x, 1)));
        }
    const double cells = static_cast<double>(flow.h()) * flow.w();
    char stats[128];
    std::snprintf(stats, sizeof(stats), "estimate: mean |u| %.6f mean |v| %.6f\n", mu / cells,
                  mv / cells);
    std::cout << stats;
    std::cout << "estimate: peak tracked bytes " << axflow::mem::peak_bytes() << "\n";

    if (!o.out.empty()) {
        axflow::write_flo(flow, o.out);
        std::cout << "estimate: wrote " << o.out << "\n";
    }
    if (!o.viz.empty()) {
        axflow::write_ppm(axflow::flow_to_color(flow), o.viz);
        std::cout << "estimate: wrote " << o.viz << "\n";
    }
    if (!o.gt.empty()) {
        axflow::FlowField gt = axflow::read_flo(o.gt);
        axflow::EvalReport report = axflow::epe_report(flow, gt);
        std::cout << report.to_csv();
        if (!o.report.empty()) {
            std::ofstream rs(o.report, std::ios::binary);
            if (!rs) throw axflow::IoError("cannot open " + o.report);
            rs << report.to_csv();
            std::cout << "estimate: wrote " << o.report << "\n";
        }
    } else if (!o.report.empty()) {
        throw axflow::ValueError("--report requires --gt");
    }
    return 0;
}

struct VerifyOpts {
    std::string suite = "all";
    int instances = 50;
    int threads = 1;
    std::uint64_t seed = 0;
};

bool suite_equivalence(std::uint64_t seed, int instances) {
    double worst = 0.0;
    axflow::Rng shape_rng(seed);
    for (int n = 0; n < instances; ++n) {
        const int h = 3 + static_cast<int>(shape_rng.uniform() * 7.0);
        const int w = 3 + static_cast<int>(shape_rng.uniform() * 7.0);
        const int d = 8 + 4 * static_cast<int>(shape_rng.uniform() * 3.0);
        axflow::Rng rng(seed + 1000 + static_cast<std::uint64_t>(n));
        axflow::FeatureMap f1{axflow::Grid({h, w, d})};
        axflow::FeatureMap f2{axflow::Grid({h, w, d})};
        rng.fill_unit_features(f1.values);
        rng.fill_unit_features(f2.values);
        axflow::VolumeWeights vw =
            axflow::random_volume_weights(d, seed + 2000 + static_cast<std::uint64_t>(n));
        axflow::CostVolumePair vols = axflow::build_cost_volumes(f1, f2, vw, true);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                for (int k = 0; k < w; ++k) {
                    const double a = vols.horizontal.values(y, x, k);
                    const double b =
                        axflow::expand_factorized(y, x, k - x, vols.cross_v, f1, f2);
                    worst = std::max(worst, std::abs(a - b) /
                                                std::max({std::abs(a), std::abs(b), 1.0}));
                }
                for (int k = 0; k < h; ++k) {
                    const double a = vols.vertical.values(y, x, k);
                    const double b =
                        axflow::expand_factorized(y, x, k - y, vols.cross_h, f1, f2);
                    worst = std::max(worst, std::abs(a - b) /
                                                std::max({std::abs(a), std::abs(b), 1.0}));
                }
            }
    }
    const bool ok = worst <= 1e-5;
    char line[160];
    std::snprintf(line, sizeof(line),
                  "[verify] equivalence: %s (%d instances, worst rel err %.3e, tol 1e-05)\n",
                  ok ? "PASS" : "FAIL", instances, worst);
    std::cout << line;
    return ok;
}

bool suite_receptive_field(std::uint64_t seed) {
    const int h = 6, w = 8, d = 12, radius = 1;
    axflow::Rng rng(seed + 7);
    axflow::ProbePipeline p;
    p.f1 = axflow::FeatureMap{axflow::Grid({h, w, d})};
    p.f2 = axflow::FeatureMap{axflow::Grid({h, w, d})};
    rng.fill_unit_features(p.f1.values);
    rng.fill_unit_features(p.f2.values);
    p.self_h = axflow::random_attention_weights(d, seed + 11);
    p.self_v = axflow::random_attention_weights(d, seed + 12);
    p.cross_v = axflow::random_attention_weights(d, seed + 13);
    p.cross_h = axflow::random_attention_weights(d, seed + 14);
    p.pe = axflow::positional_encoding(h, w, d);
    p.radius = radius;

    bool ok = true;
    const std::pair<int, int> centers[2] = {{3, 4}, {2, 2}};
    for (const auto& [y0, x0] : centers) {
        std::vector<std::pair<int, int>> affected = axflow::receptive_field_affected(p, y0, x0);
        std::size_t expected = 0;
        std::size_t mismatches = 0;
        std::vector<bool> hit(static_cast<std::size_t>(h) * w, false);
        for (const auto& [i, j] : affected) hit[static_cast<std::size_t>(i) * w + j] = true;
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const bool want = axflow::in_cross_region(i, j, y0, x0, radius);
                expected += want ? 1 : 0;
                if (want != hit[static_cast<std::size_t>(i) * w + j]) ++mismatches;
            }
        const bool pixel_ok = mismatches == 0 && affected.size() == expected;
        ok = ok && pixel_ok;
        char line[200];
        std::snprintf(line, sizeof(line),
                      "[verify] receptive-field: %s (pixel %d,%d on %dx%d radius %d: %zu affected, "
                      "%zu expected, %zu mismatches)\n",
                      pixel_ok ? "PASS" : "FAIL", y0, x0, h, w, radius, affected.size(), expected,
                      mismatches);
        std::cout << line;
    }
    return ok;
}

bool suite_gradcheck(std::uint64_t seed) {
    const double a1 = axflow::gradcheck_attention(5, 6, 8, seed);
    const double a2 = axflow::gradcheck_attention(4, 7, 8, seed + 1);
    const double c1 = axflow::gradcheck_correlation(5, 6, 8, seed);
    const double c2 = axflow::gradcheck_correlation(6, 4, 12, seed + 1);
    const double worst = std::max({a1, a2, c1, c2});
    const bool ok = worst <= 1e-4;
    char line[160];
    std::snprintf(line, sizeof(line),
                  "[verify] gradcheck: %s (attention %.3e %.3e, correlation %.3e %.3e, tol 1e-04)\n",
                  ok ? "PASS" : "FAIL", a1, a2, c1, c2);
    std::cout << line;
    return ok;
}

bool suite_translation(std::uint64_t seed) {
    const int h = 24, w = 32, d = 16, radius = 6;
    axflow::Rng rng(seed + 31);
    axflow::FeatureMap f{axflow::Grid({h, w, d})};
    rng.fill_unit_features(f.values);
    bool ok = true;
    const std::pair<int, int> shifts[2] = {{3, -2}, {-2, 1}};
    for (const auto& [dx, dy] : shifts) {
        axflow::TranslationRates rates = axflow::translation_recovery(f, dx, dy, radius);
        const bool shift_ok = rates.hit_x >= 0.99 && rates.hit_y >= 0.99;
        ok = ok && shift_ok;
        char line[200];
        std::snprintf(line, sizeof(line),
                      "[verify] translation: %s (shift %d,%d on %dx%dx%d radius %d: hit_x %.4f "
                      "hit_y %.4f over %zu interior)\n",
                      shift_ok ? "PASS" : "FAIL", dx, dy, h, w, d, radius, rates.hit_x,
                      rates.hit_y, rates.interior);
        std::cout << line;
    }
    return ok;
}

int run_verify(const VerifyOpts& o) {
    axflow::set_threads(o.threads);
    const bool all = o.suite == "all";
    bool ran = false, ok = true;
    if (all || o.suite == "equivalence") {
        ok = suite_equivalence(o.seed, o.instances) && ok;
        ran = true;
    }
    if (all || o.suite == "receptive-field") {
        ok = suite_receptive_field(o.seed) && ok;
        ran = true;
    }
    if (all || o.suite == "gradcheck") {
        ok = suite_gradcheck(o.seed) && ok;
        ran = true;
    }
    if (all || o.suite == "translation") {
        ok = suite_translation(o.seed) && ok;
        ran = true;
    }
    if (!ran) throw axflow::ValueError("unknown suite '" + o.suite + "'");
    std::cout << (ok ? "[verify] all selected suites passed\n"
                     : "[verify] FAILURES detected\n");
    return ok ? 0 : 3;
}

struct BenchOpts {
    std::string features = "8x8,16x16,32x32,64x64,136x240";
    std::string out;
    int d = 64;
    int threads = 1;
    std::uint64_t seed = 0;
    std::size_t measure_cap_mb = 1024;
};

int run_bench(const BenchOpts& o) {
    axflow::set_threads(o.threads);
    const std::vector<std::pair<int, int>> grids = parse_grids(o.features);
    const std::size_t cap_bytes = o.measure_cap_mb * std::size_t{1024} * 1024;
    std::vector<axflow::BenchRecord> records;
    for (const auto& [h, w] : grids) {
        axflow::BenchRecord r = axflow::analytic_record(h, w, o.d);
        if (r.predicted_peak <= cap_bytes) r = axflow::measured_record(h, w, o.d, o.seed);
        records.push_back(std::move(r));
    }

    std::string csv = axflow::bench_csv_header();
    for (const auto& r : records) csv += axflow::bench_csv_row(r);
    std::cout << csv;
    if (!o.out.empty()) {
        std::ofstream os(o.out, std::ios::binary);
        if (!os) throw axflow::IoError("cannot open " + o.out);
        os << csv;
        std::cout << "bench: wrote " << o.out << "\n";
    }

    if (records.size() >= 2) {
        std::vector<double> cells, ap, fa;
        for (const auto& r : records) {
            cells.push_back(static_cast<double>(r.cells));
            ap.push_back(static_cast<double>(r.allpairs_elems));
            fa.push_back(static_cast<double>(r.factorized_elems));
        }
        char line[200];
        std::snprintf(line, sizeof(line),
                      "bench: all-pairs elements scale as cells^%.4f, factorized as cells^%.4f\n",
                      axflow::fit_loglog_slope(cells, ap), axflow::fit_loglog_slope(cells, fa));
        std::cout << line;
    }
    const axflow::BenchRecord& big =
        *std::max_element(records.begin(), records.end(),
                          [](const auto& a, const auto& b) { return a.cells < b.cells; });
    char line[160];
    std::snprintf(line, sizeof(line), "bench: element ratio at %dx%d: %.2f\n", big.h, big.w,
                  big.element_ratio());
    std::cout << line;
    return 0;
}

struct AttnvizOpts {
    std::string img1, img2, feat1, feat2, weights, oracle_shift;
    std::string axis = "v";
    std::string out = "attn";
    int y = 0, x = 0;
    int d = 64;
    int threads = 1;
    std::uint64_t seed = 0;
};

int run_attnviz(const AttnvizOpts& o) {
    axflow::set_threads(o.threads);
    EstimateOpts loader;
    loader.img1 = o.img1;
    loader.img2 = o.img2;
    loader.feat1 = o.feat1;
    loader.feat2 = o.feat2;
    loader.d = o.d;
    LoadedPair pair = load_pair(loader);
    const int h = pair.f1.h(), w = pair.f1.w(), d = pair.f1.d();
    if (o.y < 0 || o.y >= h || o.x < 0 || o.x >= w)
        throw axflow::ValueError("query pixel out of range for " + std::to_string(h) + "x" +
                                 std::to_string(w) + " grid");
    if (o.axis != "v" && o.axis != "h") throw axflow::ValueError("--axis must be v or h");

    axflow::CostVolumePair vols;
    if (!o.oracle_shift.empty()) {
        int dx = 0, dy = 0;
        if (!parse_shift(o.oracle_shift, dx, dy))
            throw axflow::ValueError("bad --oracle-shift '" + o.oracle_shift + "'");
        vols = axflow::build_cost_volumes_oracle(pair.f1, pair.f2, dx, dy, true);
    } else {
        axflow::VolumeWeights vw = !o.weights.empty()
                                       ? axflow::volume_weights_from_set(axflow::load_weights(o.weights))
                                       : axflow::random_volume_weights(d, o.seed);
        vols = axflow::build_cost_volumes(pair.f1, pair.f2, vw, true);
    }
    const bool vertical = o.axis == "v";
    const axflow::AttentionMatrix& a = vertical ? vols.cross_v : vols.cross_h;
    const int n = vertical ? h : w;
    const int batch = vertical ? o.x : o.y;

    axflow::ImageGray matrix(n, n);
    float peak = 0.0f;
    for (int q = 0; q < n; ++q)
        for (int k = 0; k < n; ++k) peak = std::max(peak, a.values(batch, q, k));
    for (int q = 0; q < n; ++q)
        for (int k = 0; k < n; ++k)
            matrix.pixels[static_cast<std::size_t>(q) * n + k] =
                peak > 0.0f ? a.values(batch, q, k) / peak : 0.0f;
    const std::string matrix_path = o.out + "_matrix.pgm";
    axflow::write_pgm(matrix, matrix_path);
    std::cout << "attnviz: wrote " << matrix_path << " (query rows x attended positions, batch "
              << (vertical ? "column " : "row ") << batch << ")\n";

    const int q = vertical ? o.y : o.x;
    std::vector<float> row(static_cast<std::size_t>(n));
    float row_peak = 0.0f;
    for (int k = 0; k < n; ++k) {
        row[static_cast<std::size_t>(k)] = a.values(batch, q, k);
        row_peak = std::max(row_peak, row[static_cast<std::size_t>(k)]);
    }

    // Base image: second frame when given, otherwise feature magnitudes.
    axflow::ImageGray base;
    int scale = 1;
    if (!o.img2.empty()) {
        base = load_image_auto(o.img2);
        scale = axflow::kFeatureScale;
    } else {
        base = axflow::ImageGray(h, w);
        float mmax = 0.0f;
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx) {
                float norm2 = 0.0f;
                for (int c = 0; c < d; ++c) {
                    const float v = pair.f2.values(yy, xx, c);
                    norm2 += v * v;
                }
                base.pixels[static_cast<std::size_t>(yy) * w + xx] = std::sqrt(norm2);
                mmax = std::max(mmax, base.pixels[static_cast<std::size_t>(yy) * w + xx]);
            }
        if (mmax > 0.0f)
            for (auto& v : base.pixels) v /= mmax;
    }

    axflow::ImageRgb overlay(base.height, base.width);
    for (int yy = 0; yy < base.height; ++yy)
        for (int xx = 0; xx < base.width; ++xx) {
            const unsigned char g = static_cast<unsigned char>(
                std::lround(255.0f * std::min(std::max(base.at(yy, xx), 0.0f), 1.0f)));
            unsigned char* px =
                overlay.rgb.data() + (static_cast<std::size_t>(yy) * base.width + xx) * 3;
            const int fy = yy / scale, fx = xx / scale;
            float alpha = 0.0f;
            bool query_cell = false;
            if (vertical && fx == o.x) {
                alpha = row_peak > 0.0f ? row[static_cast<std::size_t>(std::min(fy, n - 1))] / row_peak
                                        : 0.0f;
                query_cell = fy == o.y;
            } else if (!vertical && fy == o.y) {
                alpha = row_peak > 0.0f ? row[static_cast<std::size_t>(std::min(fx, n - 1))] / row_peak
                                        : 0.0f;
                query_cell = fx == o.x;
            }
            alpha *= 0.7f;
            px[0] = static_cast<unsigned char>(std::lround(g * (1.0f - alpha) + 255.0f * alpha));
            px[1] = query_cell ? 255 : static_cast<unsigned char>(std::lround(g * (1.0f - alpha)));
            px[2] = static_cast<unsigned char>(std::lround(g * (1.0f - alpha)));
        }
    const std::string overlay_path = o.out + "_overlay.ppm";
    axflow::write_ppm(overlay, overlay_path);
    std::cout << "attnviz: wrote " << overlay_path << " (attended line of query " << o.y << ","
              << o.x << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorized 1-d matching flow toolkit"};
    app.require_subcommand(1);

    EstimateOpts eo;
    CLI::App* est = app.add_subcommand("estimate", "estimate flow for an image or feature pair");
    est->add_option("--img1", eo.img1, "first frame (binary PGM/PPM)");
    est->add_option("--img2", eo.img2, "second frame (binary PGM/PPM)");
    est->add_option("--feat1", eo.feat1, "first feature map (F1DF)");
    est->add_option("--feat2", eo.feat2, "second feature map (F1DF)");
    est->add_option("--weights", eo.weights, "weight bundle (F1DW)");
    est->add_option("--oracle-shift", eo.oracle_shift,
                    "known integer feature-grid shift dx,dy of the second frame");
    est->add_option("--solver", eo.solver, "gru | softargmax (default gru)");
    est->add_option("--radius", eo.radius, "lookup radius in feature cells (default 32)");
    est->add_option("--iters", eo.iters, "recurrent iterations (default 12)");
    est->add_option("--tau", eo.tau, "softargmax temperature (default 0.01)");
    est->add_option("--d", eo.d, "feature channels when featurizing images (default 64)");
    est->add_option("--seed", eo.seed, "seed for generated weights (default 0)");
    est->add_option("--threads", eo.threads, "worker threads (default 1)");
    est->add_option("--out", eo.out, "output flow (.flo)");
    est->add_option("--viz", eo.viz, "flow color rendering (.ppm)");
    est->add_option("--gt", eo.gt, "ground-truth flow (.flo) to evaluate against");
    est->add_option("--report", eo.report, "write the evaluation CSV here (needs --gt)");

    VerifyOpts vo;
    CLI::App* ver = app.add_subcommand("verify", "run reference checks against the fast paths");
    ver->add_option("--suite", vo.suite,
                    "equivalence | receptive-field | gradcheck | translation | all");
    ver->add_option("--instances", vo.instances, "equivalence instance count (default 50)");
    ver->add_option("--seed", vo.seed, "base seed (default 0)");
    ver->add_option("--threads", vo.threads, "worker threads (default 1)");

    BenchOpts bo;
    CLI::App* ben = app.add_subcommand("bench", "scaling comparison against the all-pairs volume");
    ben->add_option("--features", bo.features, "comma list of feature grids HxW");
    ben->add_option("--d", bo.d, "feature channels (default 64)");
    ben->add_option("--seed", bo.seed, "seed for generated features (default 0)");
    ben->add_option("--measure-cap-mb", bo.measure_cap_mb,
                    "measure only grids predicted to peak below this (default 1024)");
    ben->add_option("--out", bo.out, "write the CSV here");
    ben->add_option("--threads", bo.threads, "worker threads (default 1)");

    AttnvizOpts ao;
    CLI::App* att = app.add_subcommand("attnviz", "render a cross attention matrix and overlay");
    att->add_option("--img1", ao.img1, "first frame (binary PGM/PPM)");
    att->add_option("--img2", ao.img2, "second frame (binary PGM/PPM)");
    att->add_option("--feat1", ao.feat1, "first feature map (F1DF)");
    att->add_option("--feat2", ao.feat2, "second feature map (F1DF)");
    att->add_option("--weights", ao.weights, "weight bundle (F1DW)");
    att->add_option("--oracle-shift", ao.oracle_shift, "known integer shift dx,dy");
    att->add_option("--axis", ao.axis, "attended axis: v | h (default v)");
    att->add_option("--y", ao.y, "query row (feature grid)");
    att->add_option("--x", ao.x, "query column (feature grid)");
    att->add_option("--d", ao.d, "feature channels when featurizing (default 64)");
    att->add_option("--seed", ao.seed, "seed for generated weights (default 0)");
    att->add_option("--threads", ao.threads, "worker threads (default 1)");
    att->add_option("--out", ao.out, "output path prefix (default attn)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (est->parsed()) return run_estimate(eo);
        if (ver->parsed()) return run_verify(vo);
        if (ben->parsed()) return run_bench(bo);
        if (att->parsed()) return run_attnviz(ao);
    } catch (const axflow::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const axflow::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}
