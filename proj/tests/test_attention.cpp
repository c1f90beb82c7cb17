#include <cmath>
#include <vector>

#include "axflow/attention.hpp"
#include "axflow/oracle.hpp"
#include "axflow/rng.hpp"
#include "doctest.h"

using namespace axflow;

namespace {

FeatureMap random_features(int h, int w, int d, std::uint64_t seed) {
    Grid g({h, w, d});
    Rng rng(seed);
    rng.fill_unit_features(g);
    return FeatureMap(std::move(g));
}

std::vector<double> widen(const Grid& g) {
    return std::vector<double>(g.data(), g.data() + g.size());
}

}  // namespace

TEST_CASE("positional encoding closed forms") {
    const int h = 4, w = 3, d = 8;
    Grid pe = positional_encoding(h, w, d);
    REQUIRE(pe.dims() == std::vector<int>{h, w, d});

    // Row 0, first pair: angle 2*pi*0.5/4 = pi/4 at unit frequency.
    const float root_half = std::sqrt(0.5f);
    CHECK(pe(0, 1, 0) == doctest::Approx(root_half).epsilon(1e-6));
    CHECK(pe(0, 1, 1) == doctest::Approx(root_half).epsilon(1e-6));

    // Every (sin, cos) pair lies on the unit circle.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < d / 2; k += 2) {
                const double row = static_cast<double>(pe(y, x, k)) * pe(y, x, k) +
                                   static_cast<double>(pe(y, x, k + 1)) * pe(y, x, k + 1);
                const double col = static_cast<double>(pe(y, x, d / 2 + k)) * pe(y, x, d / 2 + k) +
                                   static_cast<double>(pe(y, x, d / 2 + k + 1)) * pe(y, x, d / 2 + k + 1);
                CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
                CHECK(col == doctest::Approx(1.0).epsilon(1e-6));
            }

    // The first half encodes only the row index, the second only the column.
    for (int y = 0; y < h; ++y)
        for (int x = 1; x < w; ++x)
            for (int c = 0; c < d / 2; ++c) CHECK(pe(y, x, c) == pe(y, 0, c));
    for (int y = 1; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = d / 2; c < d; ++c) CHECK(pe(y, x, c) == pe(0, x, c));

    CHECK_THROWS_AS(positional_encoding(4, 3, 6), ShapeError);
    CHECK_THROWS_AS(positional_encoding(0, 3, 8), ShapeError);
}

TEST_CASE("zero-weight self attention averages along the axis") {
    const int h = 5, w = 4, d = 8;
    FeatureMap f = random_features(h, w, d, 31);
    Grid pe = positional_encoding(h, w, d);
    AttentionWeights zw = zero_attention_weights(d);

    FeatureMap out = self_attention_1d(f, Axis::Vertical, zw, pe);
    // All-zero logits give exactly uniform rows, so the aggregation is the
    // same ascending-order mean the loop below computes.
    const float wgt = 1.0f / static_cast<float>(h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < d; ++c) {
                float acc = 0.0f;
                for (int i = 0; i < h; ++i) acc += wgt * f.values(i, x, c);
                CHECK(out.values(y, x, c) == acc);
            }
}

TEST_CASE("attention over a single-element axis is the identity") {
    Grid pe_row = positional_encoding(6, 1, 8);
    FeatureMap fcol = random_features(6, 1, 8, 32);
    AttentionWeights w = random_attention_weights(8, 33);
    FeatureMap out_h = self_attention_1d(fcol, Axis::Horizontal, w, pe_row);
    CHECK(bitwise_equal(out_h.values, fcol.values));

    Grid pe_col = positional_encoding(1, 6, 8);
    FeatureMap frow = random_features(1, 6, 8, 34);
    FeatureMap out_v = self_attention_1d(frow, Axis::Vertical, w, pe_col);
    CHECK(bitwise_equal(out_v.values, frow.values));
}

TEST_CASE("cross attention matches the double-precision reference") {
    const int h = 5, w = 6, d = 8;
    FeatureMap f1a = random_features(h, w, d, 35);
    FeatureMap f2 = random_features(h, w, d, 36);
    Grid pe = positional_encoding(h, w, d);
    AttentionWeights wt = random_attention_weights(d, 37);

    for (Axis axis : {Axis::Vertical, Axis::Horizontal}) {
        auto [out, a] = cross_attention_1d(f1a, f2, axis, wt, pe);
        std::vector<double> ref = ref_cross_attention_f64(
            widen(f1a.values), widen(f2.values), h, w, d, axis, widen(wt.wq), widen(wt.wk),
            widen(wt.bq), widen(wt.bk), widen(pe));
        REQUIRE(ref.size() == out.values.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::fabs(static_cast<double>(out.values.data()[i]) - ref[i]) <= 1e-5);

        // The matrix is batch-major over the orthogonal axis and row stochastic.
        if (axis == Axis::Vertical)
            REQUIRE(a.values.dims() == std::vector<int>{w, h, h});
        else
            REQUIRE(a.values.dims() == std::vector<int>{h, w, w});
        const int n = a.values.dim(2);
        for (int b = 0; b < a.values.dim(0); ++b)
            for (int r = 0; r < a.values.dim(1); ++r) {
                float sum = 0.0f;
                for (int i = 0; i < n; ++i) {
                    CHECK(a.values(b, r, i) >= 0.0f);
                    sum += a.values(b, r, i);
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
            }

        // Re-applying the returned matrix reproduces the aggregation.
        FeatureMap again = apply_attention(a, f2);
        CHECK(bitwise_equal(again.values, out.values));
    }
}

TEST_CASE("key bias shifts leave outputs unchanged and its gradient vanishes") {
    const int h = 4, w = 5, d = 8;
    FeatureMap f1a = random_features(h, w, d, 38);
    FeatureMap f2 = random_features(h, w, d, 39);
    Grid pe = positional_encoding(h, w, d);
    AttentionWeights wt = random_attention_weights(d, 40);
    AttentionWeights shifted = wt;
    for (int c = 0; c < d; ++c) shifted.bk(c) += 0.75f;

    auto [out_a, ma] = cross_attention_1d(f1a, f2, Axis::Vertical, wt, pe);
    auto [out_b, mb] = cross_attention_1d(f1a, f2, Axis::Vertical, shifted, pe);
    for (std::size_t i = 0; i < out_a.values.size(); ++i)
        CHECK(std::fabs(out_a.values.data()[i] - out_b.values.data()[i]) <= 1e-5f);

    Grid up({h, w, d});
    Rng rng(41);
    rng.fill_gaussian(up, 1.0);
    AttendGrads g = attend_vjp(f1a, f2, Axis::Vertical, wt, pe, up);
    float worst = 0.0f;
    for (int c = 0; c < d; ++c) worst = std::max(worst, std::fabs(g.bk(c)));
    CHECK(worst <= 1e-3f);
}

TEST_CASE("zero-weight cross attention gradients have closed forms") {
    const int h = 4, w = 3, d = 8;
    FeatureMap f1a = random_features(h, w, d, 42);
    FeatureMap f2 = random_features(h, w, d, 43);
    Grid pe = positional_encoding(h, w, d);
    AttentionWeights zw = zero_attention_weights(d);
    Grid up({h, w, d});
    Rng rng(44);
    rng.fill_gaussian(up, 1.0);

    AttendGrads g = attend_vjp(f1a, f2, Axis::Vertical, zw, pe, up);
    // Zero projections kill every path through the logits.
    CHECK(bitwise_equal(g.f1a, Grid({h, w, d})));
    CHECK(bitwise_equal(g.wq, Grid({d, d})));
    CHECK(bitwise_equal(g.wk, Grid({d, d})));
    CHECK(bitwise_equal(g.bq, Grid({d})));
    CHECK(bitwise_equal(g.bk, Grid({d})));
    // The value path remains: uniform attention transposes to a column mean.
    const float wgt = 1.0f / static_cast<float>(h);
    for (int i = 0; i < h; ++i)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < d; ++c) {
                float acc = 0.0f;
                for (int q = 0; q < h; ++q) acc += wgt * up(q, x, c);
                CHECK(g.f2(i, x, c) == acc);
            }
}

TEST_CASE("attention gradcheck on random instances") {
    CHECK(gradcheck_attention(3, 4, 8, 45) <= 1e-4);
    CHECK(gradcheck_attention(4, 3, 8, 46) <= 1e-4);
}

TEST_CASE("attention input validation") {
    FeatureMap f = random_features(4, 4, 8, 47);
    Grid pe = positional_encoding(4, 4, 8);
    AttentionWeights bad = zero_attention_weights(12);
    CHECK_THROWS_AS(self_attention_1d(f, Axis::Vertical, bad, pe), ShapeError);
    AttentionWeights ok = zero_attention_weights(8);
    Grid wrong_pe = positional_encoding(4, 5, 8);
    CHECK_THROWS_AS(self_attention_1d(f, Axis::Vertical, ok, wrong_pe), ShapeError);
    FeatureMap f2 = random_features(4, 5, 8, 48);
    CHECK_THROWS_AS(cross_attention_1d(f, f2, Axis::Vertical, ok, pe), ShapeError);
    AttentionMatrix m{Axis::Vertical, Grid({4, 4, 5})};
    CHECK_THROWS_AS(apply_attention(m, f), ShapeError);
}
