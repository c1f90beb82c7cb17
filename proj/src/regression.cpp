#include "axflow/regression.hpp"

#include <cmath>
#include <cstring>

#include "axflow/rng.hpp"

namespace axflow {

RegressionWeights regression_from_set(const WeightSet& set) {
    RegressionWeights w;
    w.ctx_l1 = weight(set, "ctx.l1");
    w.motion_l1 = weight(set, "motion.l1");
    w.motion_l2 = weight(set, "motion.l2");
    w.gru_kz = weight(set, "gru.kz");
    w.gru_kr = weight(set, "gru.kr");
    w.gru_kh = weight(set, "gru.kh");
    w.head_l1 = weight(set, "head.l1");
    w.head_l2 = weight(set, "head.l2");
    return w;
}

void regression_into_set(const RegressionWeights& w, WeightSet& set) {
    set["ctx.l1"] = w.ctx_l1;
    set["motion.l1"] = w.motion_l1;
    set["motion.l2"] = w.motion_l2;
    set["gru.kz"] = w.gru_kz;
    set["gru.kr"] = w.gru_kr;
    set["gru.kh"] = w.gru_kh;
    set["head.l1"] = w.head_l1;
    set["head.l2"] = w.head_l2;
}

namespace {

std::vector<std::vector<int>> regression_shapes(int d, int radius, const RegressionConfig& cfg) {
    const int slab_ch = 2 * (2 * radius + 1);
    const int xin = cfg.dc + cfg.dm;
    return {
        {d, cfg.dc},                     // ctx.l1
        {slab_ch + 2, cfg.dm},           // motion.l1
        {cfg.dm, cfg.dm},                // motion.l2
        {3, 3, cfg.dh + xin, cfg.dh},    // gru.kz
        {3, 3, cfg.dh + xin, cfg.dh},    // gru.kr
        {3, 3, cfg.dh + xin, cfg.dh},    // gru.kh
        {cfg.dh, cfg.dhead},             // head.l1
        {cfg.dhead, 2},                  // head.l2
    };
}

RegressionWeights from_grids(std::vector<Grid> g) {
    RegressionWeights w;
    w.ctx_l1 = std::move(g[0]);
    w.motion_l1 = std::move(g[1]);
    w.motion_l2 = std::move(g[2]);
    w.gru_kz = std::move(g[3]);
    w.gru_kr = std::move(g[4]);
    w.gru_kh = std::move(g[5]);
    w.head_l1 = std::move(g[6]);
    w.head_l2 = std::move(g[7]);
    return w;
}

}  // namespace

RegressionWeights zero_regression_weights(int d, int radius, const RegressionConfig& cfg) {
    std::vector<Grid> g;
    for (auto& dims : regression_shapes(d, radius, cfg)) g.emplace_back(dims);
    return from_grids(std::move(g));
}

RegressionWeights random_regression_weights(int d, int radius, std::uint64_t seed,
                                            const RegressionConfig& cfg) {
    Rng rng(seed);
    std::vector<Grid> g;
    for (auto& dims : regression_shapes(d, radius, cfg)) {
        Grid t(dims);
        std::size_t fan_in = t.size() / static_cast<std::size_t>(dims.back());
        rng.fill_gaussian(t, 1.0 / std::sqrt(static_cast<double>(fan_in)));
        g.push_back(std::move(t));
    }
    return from_grids(std::move(g));
}

Grid motion_encode(const Grid& slab, const FlowField& flow, const Grid& w1, const Grid& w2) {
    if (slab.ndim() != 3 || slab.dim(0) != flow.h() || slab.dim(1) != flow.w())
        throw ShapeError("motion_encode: slab " + dims_to_string(slab.dims()) + " vs flow " +
                         dims_to_string(flow.values.dims()));
    Grid x = concat_last(slab, flow.values);
    Grid y1 = affine_last(x, w1);
    relu_inplace(y1);
    Grid y2 = affine_last(y1, w2);
    relu_inplace(y2);
    return y2;
}

Grid conv3x3(const Grid& input, const Grid& kernel) {
    if (input.ndim() != 3 || kernel.ndim() != 4 || kernel.dim(0) != 3 || kernel.dim(1) != 3)
        throw ShapeError("conv3x3: input " + dims_to_string(input.dims()) + " kernel " +
                         dims_to_string(kernel.dims()));
    const int h = input.dim(0), w = input.dim(1), cin = input.dim(2);
    if (kernel.dim(2) != cin)
        throw ShapeError("conv3x3: kernel channels " + dims_to_string(kernel.dims()) +
                         " vs input " + dims_to_string(input.dims()));
    const int cout = kernel.dim(3);
    Grid out({h, w, cout});
    const float* pin = input.data();
    const float* pk = kernel.data();
    float* pout = out.data();
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t begin, std::size_t end) {
        for (std::size_t yy = begin; yy < end; ++yy) {
            const int y = static_cast<int>(yy);
            for (int x = 0; x < w; ++x) {
                float* orow = pout + (static_cast<std::size_t>(y) * w + x) * cout;
                std::memset(orow, 0, static_cast<std::size_t>(cout) * sizeof(float));
                for (int ky = 0; ky < 3; ++ky) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        const int sx = x + kx - 1;
                        if (sx < 0 || sx >= w) continue;
                        const float* irow = pin + (static_cast<std::size_t>(sy) * w + sx) * cin;
                        const float* krow =
                            pk + (static_cast<std::size_t>(ky) * 3 + kx) * cin * cout;
                        for (int c = 0; c < cin; ++c) {
                            const float iv = irow[c];
                            const float* kc = krow + static_cast<std::size_t>(c) * cout;
                            for (int n = 0; n < cout; ++n) orow[n] += iv * kc[n];
                        }
                    }
                }
            }
        }
    });
    return out;
}

namespace {

void sigmoid_inplace(Grid& g) {
    float* p = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) p[i] = 1.0f / (1.0f + std::exp(-p[i]));
}

void tanh_inplace(Grid& g) {
    float* p = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) p[i] = std::tanh(p[i]);
}

}  // namespace

void gru_update(UpdateState& state, const Grid& motion, const Grid& kz, const Grid& kr,
                const Grid& kh) {
    Grid x = concat_last(state.context, motion);
    Grid hx = concat_last(state.hidden, x);
    Grid z = conv3x3(hx, kz);
    sigmoid_inplace(z);
    Grid r = conv3x3(hx, kr);
    sigmoid_inplace(r);
    hx.release();

    Grid rh = state.hidden;
    {
        float* prh = rh.data();
        const float* pr = r.data();
        for (std::size_t i = 0; i < rh.size(); ++i) prh[i] *= pr[i];
    }
    r.release();
    Grid rhx = concat_last(rh, x);
    rh.release();
    x.release();
    Grid ht = conv3x3(rhx, kh);
    rhx.release();
    tanh_inplace(ht);

    float* ph = state.hidden.data();
    const float* pz = z.data();
    const float* pht = ht.data();
    for (std::size_t i = 0; i < state.hidden.size(); ++i)
        ph[i] = (1.0f - pz[i]) * ph[i] + pz[i] * pht[i];
}

FlowField flow_head(const Grid& hidden, const Grid& w1, const Grid& w2) {
    Grid y = affine_last(hidden, w1);
    relu_inplace(y);
    return FlowField(affine_last(y, w2));
}

std::vector<FlowField> iterate(const FeatureMap& f1, const CostVolume3D& volh,
                               const CostVolume3D& volv, const RegressionWeights& w, int n_iters,
                               int radius) {
    if (n_iters < 0) throw ValueError("iterate: negative iteration count");
    if (volh.direction != Axis::Horizontal || volv.direction != Axis::Vertical)
        throw ShapeError("iterate: volume directions swapped");
    const int h = f1.h(), wid = f1.w();

    UpdateState state;
    state.context = affine_last(f1.values, w.ctx_l1);
    state.hidden = Grid({h, wid, w.gru_kz.dim(3)});
    FlowField flow = FlowField::zeros(h, wid);

    std::vector<FlowField> flows;
    flows.reserve(static_cast<std::size_t>(n_iters));
    for (int it = 0; it < n_iters; ++it) {
        LookupSlab hs = lookup(volh, flow, radius);
        LookupSlab vs = lookup(volv, flow, radius);
        Grid slab = concat_lookups(hs, vs);
        hs.values.release();
        vs.values.release();
        Grid motion = motion_encode(slab, flow, w.motion_l1, w.motion_l2);
        slab.release();
        gru_update(state, motion, w.gru_kz, w.gru_kr, w.gru_kh);
        motion.release();
        FlowField delta = flow_head(state.hidden, w.head_l1, w.head_l2);
        add_inplace(flow.values, delta.values);
        flows.push_back(flow);
    }
    return flows;
}

FlowField softargmax_flow(const LookupSlab& hslab, const LookupSlab& vslab, float tau) {
    if (!(tau > 0.0f)) throw ValueError("softargmax_flow: temperature must be positive");
    if (!hslab.values.same_dims(vslab.values) || hslab.radius != vslab.radius)
        throw ShapeError("softargmax_flow: slab extents " + dims_to_string(hslab.values.dims()) +
                         " vs " + dims_to_string(vslab.values.dims()));
    const int h = hslab.values.dim(0), w = hslab.values.dim(1);
    const int radius = hslab.radius;
    const int span = 2 * radius + 1;
    FlowField flow = FlowField::zeros(h, w);
    const float* ph = hslab.values.data();
    const float* pv = vslab.values.data();
    float* pf = flow.values.data();
    std::vector<float> prob(static_cast<std::size_t>(span));
    for (std::size_t px = 0; px < static_cast<std::size_t>(h) * w; ++px) {
        for (int dir = 0; dir < 2; ++dir) {
            const float* row = (dir == 0 ? ph : pv) + px * static_cast<std::size_t>(span);
            float mx = row[0];
            for (int i = 1; i < span; ++i) mx = std::max(mx, row[i]);
            float sum = 0.0f;
            for (int i = 0; i < span; ++i) {
                prob[static_cast<std::size_t>(i)] = std::exp((row[i] - mx) / tau);
                sum += prob[static_cast<std::size_t>(i)];
            }
            float expect = 0.0f;
            for (int i = 0; i < span; ++i)
                expect += static_cast<float>(i - radius) * prob[static_cast<std::size_t>(i)];
            pf[px * 2 + dir] = expect / sum;
        }
    }
    return flow;
}

FlowField upsample_flow(const FlowField& flow, int factor) {
    if (factor < 1) throw ValueError("upsample_flow: factor must be >= 1");
    const int h = flow.h(), w = flow.w();
    const int oh = h * factor, ow = w * factor;
    FlowField out = FlowField::zeros(oh, ow);
    const float* pin = flow.values.data();
    float* pout = out.values.data();
    const float scale = static_cast<float>(factor);
    parallel_for(static_cast<std::size_t>(oh), [&](std::size_t begin, std::size_t end) {
        for (std::size_t yy = begin; yy < end; ++yy) {
            const int y = static_cast<int>(yy);
            const float sy = (static_cast<float>(y) + 0.5f) / scale - 0.5f;
            const float syc = std::min(std::max(sy, 0.0f), static_cast<float>(h - 1));
            const int y0 = static_cast<int>(std::floor(syc));
            const int y1 = std::min(y0 + 1, h - 1);
            const float ty = syc - static_cast<float>(y0);
            for (int x = 0; x < ow; ++x) {
                const float sx = (static_cast<float>(x) + 0.5f) / scale - 0.5f;
                const float sxc = std::min(std::max(sx, 0.0f), static_cast<float>(w - 1));
                const int x0 = static_cast<int>(std::floor(sxc));
                const int x1 = std::min(x0 + 1, w - 1);
                const float tx = sxc - static_cast<float>(x0);
                for (int c = 0; c < 2; ++c) {
                    const float v00 = pin[(static_cast<std::size_t>(y0) * w + x0) * 2 + c];
                    const float v01 = pin[(static_cast<std::size_t>(y0) * w + x1) * 2 + c];
                    const float v10 = pin[(static_cast<std::size_t>(y1) * w + x0) * 2 + c];
                    const float v11 = pin[(static_cast<std::size_t>(y1) * w + x1) * 2 + c];
                    const float top = v00 * (1.0f - tx) + v01 * tx;
                    const float bot = v10 * (1.0f - tx) + v11 * tx;
                    pout[(static_cast<std::size_t>(y) * ow + x) * 2 + c] =
                        (top * (1.0f - ty) + bot * ty) * scale;
                }
            }
        }
    });
    return out;
}

}  // namespace axflow
