#include <cmath>
#include <vector>

#include "axflow/regression.hpp"
#include "axflow/rng.hpp"
#include "doctest.h"

using namespace axflow;

namespace {

const RegressionConfig kTinyCfg{8, 8, 8, 8};

FeatureMap random_features(int h, int w, int d, std::uint64_t seed) {
    Grid g({h, w, d});
    Rng rng(seed);
    rng.fill_unit_features(g);
    return FeatureMap(std::move(g));
}

}  // namespace

TEST_CASE("conv3x3 matches a double-precision loop including borders") {
    const int h = 4, w = 5, cin = 3, cout = 2;
    Rng rng(81);
    Grid input({h, w, cin});
    Grid kernel({3, 3, cin, cout});
    rng.fill_gaussian(input, 1.0);
    rng.fill_gaussian(kernel, 1.0);
    Grid out = conv3x3(input, kernel);
    REQUIRE(out.dims() == std::vector<int>{h, w, cout});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int n = 0; n < cout; ++n) {
                double acc = 0.0;
                for (int ky = 0; ky < 3; ++ky)
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sy = y + ky - 1, sx = x + kx - 1;
                        if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;  // zero pad
                        for (int c = 0; c < cin; ++c)
                            acc += static_cast<double>(input(sy, sx, c)) * kernel(ky, kx, c, n);
                    }
                CHECK(std::fabs(static_cast<double>(out(y, x, n)) - acc) <= 1e-5);
            }
    CHECK_THROWS_AS(conv3x3(input, Grid({3, 3, 4, 2})), ShapeError);
    CHECK_THROWS_AS(conv3x3(input, Grid({2, 2, 3, 2})), ShapeError);
}

TEST_CASE("zero-kernel gru step halves the hidden state bitwise") {
    // sigmoid(0) is exactly 0.5 and tanh(0) exactly 0, so the blend becomes
    // h' = 0.5 h with no roundoff.
    RegressionWeights w = zero_regression_weights(8, 1, kTinyCfg);
    UpdateState st;
    st.hidden = Grid({3, 4, kTinyCfg.dh});
    st.context = Grid({3, 4, kTinyCfg.dc});
    Rng rng(82);
    rng.fill_gaussian(st.hidden, 1.0);
    rng.fill_gaussian(st.context, 1.0);
    Grid motion({3, 4, kTinyCfg.dm});
    rng.fill_gaussian(motion, 1.0);

    Grid halved = st.hidden;
    scale_inplace(halved, 0.5f);
    gru_update(st, motion, w.gru_kz, w.gru_kr, w.gru_kh);
    CHECK(bitwise_equal(st.hidden, halved));
}

TEST_CASE("gru hidden state stays strictly inside (-1, 1)") {
    RegressionWeights w = random_regression_weights(8, 1, 83, kTinyCfg);
    UpdateState st;
    st.hidden = Grid({4, 5, kTinyCfg.dh});
    st.context = Grid({4, 5, kTinyCfg.dc});
    Rng rng(84);
    rng.fill_gaussian(st.context, 1.0);
    for (int step = 0; step < 4; ++step) {
        Grid motion({4, 5, kTinyCfg.dm});
        rng.fill_gaussian(motion, 1.0);
        gru_update(st, motion, w.gru_kz, w.gru_kr, w.gru_kh);
        for (std::size_t i = 0; i < st.hidden.size(); ++i) {
            CHECK(st.hidden.data()[i] > -1.0f);
            CHECK(st.hidden.data()[i] < 1.0f);
        }
    }
}

TEST_CASE("motion_encode shapes and nonnegativity") {
    const int h = 3, w = 4, radius = 1;
    const int slab_ch = 2 * (2 * radius + 1);
    Rng rng(85);
    Grid slab({h, w, slab_ch});
    rng.fill_gaussian(slab, 1.0);
    FlowField flow = FlowField::zeros(h, w);
    Grid w1({slab_ch + 2, kTinyCfg.dm});
    Grid w2({kTinyCfg.dm, kTinyCfg.dm});
    rng.fill_gaussian(w1, 0.3);
    rng.fill_gaussian(w2, 0.3);
    Grid m = motion_encode(slab, flow, w1, w2);
    REQUIRE(m.dims() == std::vector<int>{h, w, kTinyCfg.dm});
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.data()[i] >= 0.0f);  // final relu
    CHECK_THROWS_AS(motion_encode(Grid({h, w + 1, slab_ch}), flow, w1, w2), ShapeError);
}

TEST_CASE("flow_head of a zero hidden state is zero flow") {
    Grid hidden({3, 4, kTinyCfg.dh});
    Rng rng(86);
    Grid w1({kTinyCfg.dh, kTinyCfg.dhead});
    Grid w2({kTinyCfg.dhead, 2});
    rng.fill_gaussian(w1, 1.0);
    rng.fill_gaussian(w2, 1.0);
    FlowField f = flow_head(hidden, w1, w2);
    CHECK(bitwise_equal(f.values, Grid({3, 4, 2})));
}

TEST_CASE("iterate with zero weights returns bitwise-zero flows") {
    const int h = 4, w = 5, d = 8, radius = 1;
    FeatureMap f1 = random_features(h, w, d, 87);
    FeatureMap f2 = random_features(h, w, d, 88);
    CostVolume3D volh = correlate_full(f1, f2, Axis::Horizontal);
    CostVolume3D volv = correlate_full(f1, f2, Axis::Vertical);
    RegressionWeights zw = zero_regression_weights(d, radius, kTinyCfg);
    std::vector<FlowField> flows = iterate(f1, volh, volv, zw, 3, radius);
    REQUIRE(flows.size() == 3);
    for (const FlowField& f : flows) CHECK(bitwise_equal(f.values, Grid({h, w, 2})));

    CHECK_THROWS_AS(iterate(f1, volh, volv, zw, -1, radius), ValueError);
    CHECK_THROWS_AS(iterate(f1, volv, volh, zw, 1, radius), ShapeError);
}

TEST_CASE("iterate with random weights stays finite and accumulates deltas") {
    const int h = 4, w = 5, d = 8, radius = 1;
    FeatureMap f1 = random_features(h, w, d, 89);
    FeatureMap f2 = random_features(h, w, d, 90);
    CostVolume3D volh = correlate_full(f1, f2, Axis::Horizontal);
    CostVolume3D volv = correlate_full(f1, f2, Axis::Vertical);
    RegressionWeights rw = random_regression_weights(d, radius, 91, kTinyCfg);
    std::vector<FlowField> flows = iterate(f1, volh, volv, rw, 2, radius);
    REQUIRE(flows.size() == 2);
    for (const FlowField& f : flows) {
        REQUIRE(f.values.dims() == std::vector<int>{h, w, 2});
        CHECK(all_finite(f.values));
    }
}

TEST_CASE("softargmax_flow closed forms") {
    const int radius = 5, span = 2 * radius + 1;
    // A lone spike at displacement +3 with a cold temperature.
    LookupSlab hs{radius, Grid({1, 1, span})};
    hs.values(0, 0, radius + 3) = 1.0f;
    LookupSlab vs{radius, Grid({1, 1, span})};
    vs.values(0, 0, radius - 2) = 1.0f;
    FlowField f = softargmax_flow(hs, vs, 0.01f);
    CHECK(std::fabs(f.values(0, 0, 0) - 3.0f) <= 1e-3f);
    CHECK(std::fabs(f.values(0, 0, 1) + 2.0f) <= 1e-3f);

    // A uniform slab: the expectation is an exact integer cancellation.
    LookupSlab uh{radius, Grid::full({2, 2, span}, 0.37f)};
    LookupSlab uv{radius, Grid::full({2, 2, span}, -1.25f)};
    FlowField u = softargmax_flow(uh, uv, 1.0f);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            CHECK(u.values(y, x, 0) == 0.0f);
            CHECK(u.values(y, x, 1) == 0.0f);
        }

    CHECK_THROWS_AS(softargmax_flow(hs, vs, 0.0f), ValueError);
    LookupSlab wrong{radius + 1, Grid({1, 1, span + 2})};
    CHECK_THROWS_AS(softargmax_flow(hs, wrong, 1.0f), ShapeError);
}

TEST_CASE("upsample_flow scales dyadic constants exactly") {
    FlowField flow = FlowField::zeros(3, 4);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) {
            flow.values(y, x, 0) = 0.25f;
            flow.values(y, x, 1) = -0.5f;
        }
    FlowField up = upsample_flow(flow, 2);
    REQUIRE(up.values.dims() == std::vector<int>{6, 8, 2});
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) {
            CHECK(up.values(y, x, 0) == 0.5f);
            CHECK(up.values(y, x, 1) == -1.0f);
        }
    CHECK_THROWS_AS(upsample_flow(flow, 0), ValueError);
}

TEST_CASE("upsample_flow by factor 1 is the identity") {
    FlowField flow = FlowField::zeros(3, 4);
    Rng rng(92);
    rng.fill_gaussian(flow.values, 2.0);
    FlowField up = upsample_flow(flow, 1);
    CHECK(bitwise_equal(up.values, flow.values));
}

TEST_CASE("upsample_flow reproduces a linear ramp away from the clamped edge") {
    const int h = 4, w = 6, factor = 2;
    FlowField flow = FlowField::zeros(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            flow.values(y, x, 0) = 0.1f * static_cast<float>(x);
            flow.values(y, x, 1) = 0.2f * static_cast<float>(y);
        }
    FlowField up = upsample_flow(flow, factor);
    for (int y = 1; y < h * factor - 1; ++y)
        for (int x = 1; x < w * factor - 1; ++x) {
            const double sx = (x + 0.5) / factor - 0.5;
            const double sy = (y + 0.5) / factor - 0.5;
            CHECK(std::fabs(up.values(y, x, 0) - 0.1 * sx * factor) <= 1e-5);
            CHECK(std::fabs(up.values(y, x, 1) - 0.2 * sy * factor) <= 1e-5);
        }
}

TEST_CASE("regression weights round trip through a weight set") {
    RegressionWeights w = random_regression_weights(16, 2, 93);
    WeightSet set;
    regression_into_set(w, set);
    const char* names[8] = {"ctx.l1", "motion.l1", "motion.l2", "gru.kz",
                            "gru.kr", "gru.kh",    "head.l1",   "head.l2"};
    REQUIRE(set.size() == 8);
    for (const char* n : names) CHECK(set.count(n) == 1);
    RegressionWeights back = regression_from_set(set);
    CHECK(bitwise_equal(back.ctx_l1, w.ctx_l1));
    CHECK(bitwise_equal(back.motion_l1, w.motion_l1));
    CHECK(bitwise_equal(back.motion_l2, w.motion_l2));
    CHECK(bitwise_equal(back.gru_kz, w.gru_kz));
    CHECK(bitwise_equal(back.gru_kr, w.gru_kr));
    CHECK(bitwise_equal(back.gru_kh, w.gru_kh));
    CHECK(bitwise_equal(back.head_l1, w.head_l1));
    CHECK(bitwise_equal(back.head_l2, w.head_l2));

    // Default layer extents: slab channels 2*(2R+1) plus the two flow
    // channels feed motion.l1, the gru kernels see Dh+Dc+Dm input channels.
    CHECK(w.ctx_l1.dims() == std::vector<int>{16, 64});
    CHECK(w.motion_l1.dims() == std::vector<int>{12, 64});
    CHECK(w.gru_kz.dims() == std::vector<int>{3, 3, 224, 96});
    CHECK(w.head_l2.dims() == std::vector<int>{128, 2});
}
