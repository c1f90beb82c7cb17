#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace axflow {

// One scaling comparison at feature grid (h, w) with d channels: the
// all-pairs 4-d volume holds (h*w)^2 entries, the factorized pair holds
// h*w*(h+w). Peak figures describe the factorized build including its
// temporaries, measured against a baseline holding the two input maps.
struct BenchRecord {
    int h = 0, w = 0, d = 0;
    std::size_t cells = 0;
    std::size_t allpairs_elems = 0;
    std::size_t factorized_elems = 0;
    std::size_t allpairs_bytes = 0;
    std::size_t factorized_bytes = 0;
    std::size_t predicted_peak = 0;
    std::size_t measured_peak = 0;  // 0 when not measured
    double build_time_ms = 0.0;     // 0 when not measured
    std::string status = "analytic";  // analytic | ok | oom

    double element_ratio() const {
        return static_cast<double>(allpairs_elems) / static_cast<double>(factorized_elems);
    }
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRecord& r);

// Element counts and byte figures only; nothing is allocated.
BenchRecord analytic_record(int h, int w, int d);

// Runs the learned volume build on seeded random unit features and records
// the tracked peak and wall time. An allocation failure downgrades the row
// to status "oom" with the analytic figures intact.
BenchRecord measured_record(int h, int w, int d, std::uint64_t seed);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace axflow
