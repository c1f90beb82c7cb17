#include "axflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "axflow/rng.hpp"

namespace axflow {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

CostVolume4D allpairs_4d(const FeatureMap& f1, const FeatureMap& f2) {
    if (!f1.values.same_dims(f2.values))
        throw ShapeError("allpairs_4d: feature extents " + dims_to_string(f1.values.dims()) +
                         " vs " + dims_to_string(f2.values.dims()));
    const int h = f1.h(), w = f1.w(), d = f1.d();
    if (h * w > kAllPairsCellCap)
        throw CapError("allpairs_4d: " + std::to_string(h * w) + " cells exceeds cap " +
                       std::to_string(kAllPairsCellCap));
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Grid vol({h, w, h, w});
    const float* p1 = f1.values.data();
    const float* p2 = f2.values.data();
    float* pv = vol.data();
    const std::size_t cells = static_cast<std::size_t>(h) * w;
    for (std::size_t a = 0; a < cells; ++a) {
        const float* fa = p1 + a * static_cast<std::size_t>(d);
        float* vrow = pv + a * cells;
        for (std::size_t b = 0; b < cells; ++b) {
            const float* fb = p2 + b * static_cast<std::size_t>(d);
            double acc = 0.0;
            for (int c = 0; c < d; ++c)
                acc += static_cast<double>(fa[c]) * static_cast<double>(fb[c]);
            vrow[b] = static_cast<float>(acc * inv_sqrt_d);
        }
    }
    return CostVolume4D{std::move(vol)};
}

double expand_factorized(int h, int w, int r, const AttentionMatrix& a, const FeatureMap& f1,
                         const FeatureMap& f2) {
    if (!f1.values.same_dims(f2.values))
        throw ShapeError("expand_factorized: feature extents mismatch");
    const int hh = f1.h(), ww = f1.w(), d = f1.d();
    if (h < 0 || h >= hh || w < 0 || w >= ww)
        throw ShapeError("expand_factorized: pixel out of range");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const float* p1 = f1.values.data() + (static_cast<std::size_t>(h) * ww + w) * d;
    const float* p2 = f2.values.data();

    if (a.axis == Axis::Vertical) {
        const int k = w + r;
        if (k < 0 || k >= ww)
            throw ShapeError("expand_factorized: displaced column " + std::to_string(k) +
                             " out of range");
        double total = 0.0;
        for (int i = 0; i < hh; ++i) {
            const float* fb = p2 + (static_cast<std::size_t>(i) * ww + k) * d;
            double dot = 0.0;
            for (int c = 0; c < d; ++c)
                dot += static_cast<double>(p1[c]) * static_cast<double>(fb[c]);
            total += static_cast<double>(a.values(k, h, i)) * dot;
        }
        return total * inv_sqrt_d;
    }

    const int k = h + r;
    if (k < 0 || k >= hh)
        throw ShapeError("expand_factorized: displaced row " + std::to_string(k) + " out of range");
    double total = 0.0;
    for (int j = 0; j < ww; ++j) {
        const float* fb = p2 + (static_cast<std::size_t>(k) * ww + j) * d;
        double dot = 0.0;
        for (int c = 0; c < d; ++c)
            dot += static_cast<double>(p1[c]) * static_cast<double>(fb[c]);
        total += static_cast<double>(a.values(k, w, j)) * dot;
    }
    return total * inv_sqrt_d;
}

AttentionMatrix oracle_attention(int delta, int h, int w, Axis axis) {
    const int extent = axis == Axis::Vertical ? h : w;
    if (std::abs(delta) >= extent)
        throw ValueError("oracle_attention: shift " + std::to_string(delta) +
                         " too large for extent " + std::to_string(extent));
    if (axis == Axis::Vertical) {
        Grid a({w, h, h});
        for (int x = 0; x < w; ++x)
            for (int y = 0; y < h; ++y) a(x, y, clampi(y + delta, 0, h - 1)) = 1.0f;
        return AttentionMatrix{axis, std::move(a)};
    }
    Grid a({h, w, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) a(y, x, clampi(x + delta, 0, w - 1)) = 1.0f;
    return AttentionMatrix{axis, std::move(a)};
}

FeatureMap shift_features(const FeatureMap& f, int dx, int dy) {
    const int h = f.h(), w = f.w(), d = f.d();
    Grid out({h, w, d});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sy = y - dy, sx = x - dx;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
            std::memcpy(out.data() + (static_cast<std::size_t>(y) * w + x) * d,
                        f.values.data() + (static_cast<std::size_t>(sy) * w + sx) * d,
                        static_cast<std::size_t>(d) * sizeof(float));
        }
    return FeatureMap(std::move(out));
}

bool translation_interior(int y, int x, int h, int w, int radius, int dx, int dy) {
    if (x < radius || x >= w - radius || y < radius || y >= h - radius) return false;
    const int ty = y + dy, tx = x + dx;
    return ty >= 0 && ty < h && tx >= 0 && tx < w;
}

TranslationRates translation_recovery(const FeatureMap& f, int dx, int dy, int radius) {
    const int h = f.h(), w = f.w();
    if (radius < 1) throw ValueError("translation_recovery: radius must be >= 1");
    if (std::abs(dx) > radius || std::abs(dy) > radius)
        throw ValueError("translation_recovery: shift exceeds radius");

    FeatureMap f2 = shift_features(f, dx, dy);
    AttentionMatrix av = oracle_attention(dy, h, w, Axis::Vertical);
    FeatureMap f2v = apply_attention(av, f2);
    CostVolume3D volh = correlate_full(f, f2v, Axis::Horizontal);
    AttentionMatrix ah = oracle_attention(dx, h, w, Axis::Horizontal);
    FeatureMap f2h = apply_attention(ah, f2);
    CostVolume3D volv = correlate_full(f, f2h, Axis::Vertical);

    FlowField zero = FlowField::zeros(h, w);
    LookupSlab hs = lookup(volh, zero, radius);
    LookupSlab vs = lookup(volv, zero, radius);

    TranslationRates rates;
    std::size_t hit_x = 0, hit_y = 0;
    const int span = 2 * radius + 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!translation_interior(y, x, h, w, radius, dx, dy)) continue;
            ++rates.interior;
            const float* hrow = hs.values.data() + (static_cast<std::size_t>(y) * w + x) * span;
            const float* vrow = vs.values.data() + (static_cast<std::size_t>(y) * w + x) * span;
            const int ax = static_cast<int>(std::max_element(hrow, hrow + span) - hrow) - radius;
            const int ay = static_cast<int>(std::max_element(vrow, vrow + span) - vrow) - radius;
            if (ax == dx) ++hit_x;
            if (ay == dy) ++hit_y;
        }
    if (rates.interior == 0) throw ValueError("translation_recovery: no interior pixels");
    rates.hit_x = static_cast<double>(hit_x) / static_cast<double>(rates.interior);
    rates.hit_y = static_cast<double>(hit_y) / static_cast<double>(rates.interior);
    return rates;
}

namespace {

// Concatenated zero-flow slab of the full two-branch pipeline.
Grid pipeline_slab(const ProbePipeline& p, const FeatureMap& f2) {
    FeatureMap f1a_h = self_attention_1d(p.f1, Axis::Horizontal, p.self_h, p.pe);
    auto crossv = cross_attention_1d(f1a_h, f2, Axis::Vertical, p.cross_v, p.pe);
    CostVolume3D volh = correlate_full(p.f1, crossv.first, Axis::Horizontal);

    FeatureMap f1a_v = self_attention_1d(p.f1, Axis::Vertical, p.self_v, p.pe);
    auto crossh = cross_attention_1d(f1a_v, f2, Axis::Horizontal, p.cross_h, p.pe);
    CostVolume3D volv = correlate_full(p.f1, crossh.first, Axis::Vertical);

    FlowField zero = FlowField::zeros(p.f1.h(), p.f1.w());
    LookupSlab hs = lookup(volh, zero, p.radius);
    LookupSlab vs = lookup(volv, zero, p.radius);
    return concat_lookups(hs, vs);
}

bool pixel_rows_differ(const Grid& a, const Grid& b, int y, int x) {
    const int n = a.dim(2);
    const std::size_t off = (static_cast<std::size_t>(y) * a.dim(1) + x) * n;
    return std::memcmp(a.data() + off, b.data() + off, static_cast<std::size_t>(n) * sizeof(float)) != 0;
}

}  // namespace

bool receptive_field_probe(const ProbePipeline& p, int y0, int x0, int i, int j) {
    Grid base = pipeline_slab(p, p.f2);
    FeatureMap bumped = p.f2;
    bumped.values(i, j, 0) += 1.0f;
    Grid probed = pipeline_slab(p, bumped);
    return pixel_rows_differ(base, probed, y0, x0);
}

bool in_cross_region(int i, int j, int y0, int x0, int radius) {
    return std::abs(j - x0) <= radius || std::abs(i - y0) <= radius;
}

std::vector<std::pair<int, int>> receptive_field_affected(const ProbePipeline& p, int y0, int x0) {
    Grid base = pipeline_slab(p, p.f2);
    std::vector<std::pair<int, int>> affected;
    for (int i = 0; i < p.f2.h(); ++i)
        for (int j = 0; j < p.f2.w(); ++j) {
            FeatureMap bumped = p.f2;
            bumped.values(i, j, 0) += 1.0f;
            Grid probed = pipeline_slab(p, bumped);
            if (pixel_rows_differ(base, probed, y0, x0)) affected.emplace_back(i, j);
        }
    return affected;
}

namespace {

// q = (f + pe) wq + bq in f64, row-major (H*W, D).
std::vector<double> project_f64(const std::vector<double>& f, const std::vector<double>& pe,
                                const std::vector<double>& wm, const std::vector<double>& b,
                                int cells, int d) {
    std::vector<double> out(static_cast<std::size_t>(cells) * d);
    for (int px = 0; px < cells; ++px)
        for (int n = 0; n < d; ++n) {
            double acc = b[static_cast<std::size_t>(n)];
            for (int c = 0; c < d; ++c)
                acc += (f[static_cast<std::size_t>(px) * d + c] + pe[static_cast<std::size_t>(px) * d + c]) *
                       wm[static_cast<std::size_t>(c) * d + n];
            out[static_cast<std::size_t>(px) * d + n] = acc;
        }
    return out;
}

}  // namespace

std::vector<double> ref_cross_attention_f64(const std::vector<double>& f1a,
                                            const std::vector<double>& f2, int h, int w, int d,
                                            Axis axis, const std::vector<double>& wq,
                                            const std::vector<double>& wk,
                                            const std::vector<double>& bq,
                                            const std::vector<double>& bk,
                                            const std::vector<double>& pe) {
    const int cells = h * w;
    std::vector<double> q = project_f64(f1a, pe, wq, bq, cells, d);
    std::vector<double> k = project_f64(f2, pe, wk, bk, cells, d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const int extent = axis == Axis::Vertical ? h : w;
    std::vector<double> out(static_cast<std::size_t>(cells) * d, 0.0);
    std::vector<double> logits(static_cast<std::size_t>(extent));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t qoff = (static_cast<std::size_t>(y) * w + x) * d;
            for (int t = 0; t < extent; ++t) {
                const std::size_t koff =
                    axis == Axis::Vertical
                        ? (static_cast<std::size_t>(t) * w + x) * d
                        : (static_cast<std::size_t>(y) * w + t) * d;
                double dot = 0.0;
                for (int c = 0; c < d; ++c) dot += q[qoff + c] * k[koff + c];
                logits[static_cast<std::size_t>(t)] = dot * inv_sqrt_d;
            }
            double mx = logits[0];
            for (int t = 1; t < extent; ++t) mx = std::max(mx, logits[static_cast<std::size_t>(t)]);
            double sum = 0.0;
            for (int t = 0; t < extent; ++t) {
                logits[static_cast<std::size_t>(t)] = std::exp(logits[static_cast<std::size_t>(t)] - mx);
                sum += logits[static_cast<std::size_t>(t)];
            }
            for (int t = 0; t < extent; ++t) {
                const double a = logits[static_cast<std::size_t>(t)] / sum;
                const std::size_t voff =
                    axis == Axis::Vertical
                        ? (static_cast<std::size_t>(t) * w + x) * d
                        : (static_cast<std::size_t>(y) * w + t) * d;
                for (int c = 0; c < d; ++c) out[qoff + c] += a * f2[voff + c];
            }
        }
    return out;
}

std::vector<double> ref_correlate_f64(const std::vector<double>& f1, const std::vector<double>& f2,
                                      int h, int w, int d, Axis axis) {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const int n = axis == Axis::Horizontal ? w : h;
    std::vector<double> out(static_cast<std::size_t>(h) * w * n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < n; ++k) {
                const std::size_t aoff = (static_cast<std::size_t>(y) * w + x) * d;
                const std::size_t boff = axis == Axis::Horizontal
                                             ? (static_cast<std::size_t>(y) * w + k) * d
                                             : (static_cast<std::size_t>(k) * w + x) * d;
                double acc = 0.0;
                for (int c = 0; c < d; ++c) acc += f1[aoff + c] * f2[boff + c];
                out[(static_cast<std::size_t>(y) * w + x) * n + k] = acc * inv_sqrt_d;
            }
    return out;
}

namespace {

constexpr double kFdStep = 1e-3;

std::vector<double> widen(const Grid& g) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<double>(g.data()[i]);
    return out;
}

// Relative error with an absolute floor of 1. The floor matters for tensors
// whose true gradient is identically zero (the key bias: shifting it moves
// every logit of a softmax row equally, so the output is invariant); a pure
// relative error is undefined there, while a real mismatch still scores ~1.
double tensor_rel_err(const Grid& analytic, const std::vector<double>& fd) {
    double num = 0.0, den = 1.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        num = std::max(num, std::abs(static_cast<double>(analytic.data()[i]) - fd[i]));
        den = std::max({den, std::abs(fd[i]), std::abs(static_cast<double>(analytic.data()[i]))});
    }
    return num / den;
}

}  // namespace

double gradcheck_attention(int h, int w, int d, std::uint64_t seed) {
    if (d % 4 != 0) throw ShapeError("gradcheck_attention: d must be divisible by 4");
    Rng rng(seed);
    FeatureMap f1a{Grid({h, w, d})};
    FeatureMap f2{Grid({h, w, d})};
    rng.fill_gaussian(f1a.values, 1.0);
    rng.fill_gaussian(f2.values, 1.0);
    AttentionWeights wts = random_attention_weights(d, seed + 1);
    Grid pe = positional_encoding(h, w, d);
    Grid upstream({h, w, d});
    rng.fill_gaussian(upstream, 1.0);

    const std::vector<double> pe64 = widen(pe);
    const std::vector<double> up64 = widen(upstream);

    double worst = 0.0;
    for (Axis axis : {Axis::Vertical, Axis::Horizontal}) {
        AttendGrads an = attend_vjp(f1a, f2, axis, wts, pe, upstream);

        // Parameter vector layout: f1a, f2, wq, wk, bq, bk.
        std::vector<double> theta[6] = {widen(f1a.values), widen(f2.values), widen(wts.wq),
                                        widen(wts.wk),     widen(wts.bq),    widen(wts.bk)};
        const Grid* analytic[6] = {&an.f1a, &an.f2, &an.wq, &an.wk, &an.bq, &an.bk};

        auto loss = [&](const std::vector<double> t[6]) {
            std::vector<double> out =
                ref_cross_attention_f64(t[0], t[1], h, w, d, axis, t[2], t[3], t[4], t[5], pe64);
            double l = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) l += up64[i] * out[i];
            return l;
        };

        for (int p = 0; p < 6; ++p) {
            std::vector<double> fd(theta[p].size());
            for (std::size_t i = 0; i < theta[p].size(); ++i) {
                const double keep = theta[p][i];
                theta[p][i] = keep + kFdStep;
                const double lp = loss(theta);
                theta[p][i] = keep - kFdStep;
                const double lm = loss(theta);
                theta[p][i] = keep;
                fd[i] = (lp - lm) / (2.0 * kFdStep);
            }
            worst = std::max(worst, tensor_rel_err(*analytic[p], fd));
        }
    }
    return worst;
}

double gradcheck_correlation(int h, int w, int d, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMap f1{Grid({h, w, d})};
    FeatureMap f2{Grid({h, w, d})};
    rng.fill_gaussian(f1.values, 1.0);
    rng.fill_gaussian(f2.values, 1.0);

    double worst = 0.0;
    for (Axis direction : {Axis::Horizontal, Axis::Vertical}) {
        const int n = direction == Axis::Horizontal ? w : h;
        Grid upstream({h, w, n});
        rng.fill_gaussian(upstream, 1.0);
        CorrelateGrads an = correlate_vjp(f1, f2, direction, upstream);

        std::vector<double> theta[2] = {widen(f1.values), widen(f2.values)};
        const Grid* analytic[2] = {&an.f1, &an.f2agg};
        const std::vector<double> up64 = widen(upstream);

        auto loss = [&](const std::vector<double> t[2]) {
            std::vector<double> out = ref_correlate_f64(t[0], t[1], h, w, d, direction);
            double l = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) l += up64[i] * out[i];
            return l;
        };

        for (int p = 0; p < 2; ++p) {
            std::vector<double> fd(theta[p].size());
            for (std::size_t i = 0; i < theta[p].size(); ++i) {
                const double keep = theta[p][i];
                theta[p][i] = keep + kFdStep;
                const double lp = loss(theta);
                theta[p][i] = keep - kFdStep;
                const double lm = loss(theta);
                theta[p][i] = keep;
                fd[i] = (lp - lm) / (2.0 * kFdStep);
            }
            worst = std::max(worst, tensor_rel_err(*analytic[p], fd));
        }
    }
    return worst;
}

}  // namespace axflow
