#include <cmath>
#include <vector>

#include "axflow/bench.hpp"
#include "axflow/grid.hpp"
#include "axflow/pipeline.hpp"
#include "doctest.h"

using namespace axflow;

TEST_CASE("analytic_record element counts") {
    BenchRecord r = analytic_record(8, 8, 64);
    CHECK(r.cells == 64);
    CHECK(r.allpairs_elems == 4096);
    CHECK(r.factorized_elems == 1024);  // 64 * (8 + 8)
    CHECK(r.allpairs_bytes == 4096 * sizeof(float));
    CHECK(r.factorized_bytes == 1024 * sizeof(float));
    CHECK(r.predicted_peak == predicted_peak_bytes(8, 8, 64));
    CHECK(r.element_ratio() == 4.0);
    CHECK(r.status == "analytic");
    CHECK(r.measured_peak == 0);
    CHECK_THROWS_AS(analytic_record(0, 8, 64), ValueError);
}

TEST_CASE("element ratio at the published working resolution") {
    // At one eighth of 1088x1920 the factorized pair is ~86.8x smaller.
    BenchRecord r = analytic_record(136, 240, 256);
    CHECK(r.cells == 32640);
    CHECK(r.allpairs_elems == 32640ull * 32640ull);
    CHECK(r.factorized_elems == 32640ull * 376ull);
    CHECK(r.element_ratio() == doctest::Approx(86.8085).epsilon(1e-4));
}

TEST_CASE("bench CSV layout") {
    CHECK(bench_csv_header() ==
          "h,w,d,cells,allpairs_elems,factorized_elems,allpairs_bytes,factorized_bytes,"
          "predicted_peak,measured_peak,build_time_ms,status\n");
    BenchRecord r;
    r.h = 2;
    r.w = 3;
    r.d = 4;
    r.cells = 6;
    r.allpairs_elems = 36;
    r.factorized_elems = 30;
    r.allpairs_bytes = 144;
    r.factorized_bytes = 120;
    r.predicted_peak = 999;
    CHECK(bench_csv_row(r) == "2,3,4,6,36,30,144,120,999,0,0.000,analytic\n");
}

TEST_CASE("measured_record agrees with the prediction") {
    BenchRecord r = measured_record(8, 8, 8, 141);
    CHECK(r.status == "ok");
    CHECK(r.measured_peak == r.predicted_peak);
    CHECK(r.build_time_ms >= 0.0);
    BenchRecord a = analytic_record(8, 8, 8);
    CHECK(r.allpairs_elems == a.allpairs_elems);
    CHECK(r.factorized_elems == a.factorized_elems);
}

TEST_CASE("fit_loglog_slope recovers exact power laws") {
    const std::vector<double> x = {1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> quadratic, sesquilinear;
    for (double v : x) {
        quadratic.push_back(v * v);
        sesquilinear.push_back(std::pow(v, 1.5));
    }
    CHECK(fit_loglog_slope(x, quadratic) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit_loglog_slope(x, sesquilinear) == doctest::Approx(1.5).epsilon(1e-9));

    CHECK_THROWS_AS(fit_loglog_slope({1.0}, {1.0}), ValueError);
    CHECK_THROWS_AS(fit_loglog_slope({1.0, 2.0}, {1.0}), ValueError);
    CHECK_THROWS_AS(fit_loglog_slope({1.0, -2.0}, {1.0, 4.0}), ValueError);
    CHECK_THROWS_AS(fit_loglog_slope({3.0, 3.0}, {1.0, 4.0}), ValueError);
}
