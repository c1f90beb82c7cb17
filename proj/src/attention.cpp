#include "axflow/attention.hpp"

#include <cmath>

#include "axflow/rng.hpp"

namespace axflow {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kTemperatureBase = 10000.0;

void check_attention_inputs(const FeatureMap& f, const AttentionWeights& w, const Grid& pe) {
    const int d = f.d();
    if (w.wq.ndim() != 2 || w.wq.dim(0) != d || w.wq.dim(1) != d || !w.wq.same_dims(w.wk))
        throw ShapeError("attention: weight extents " + dims_to_string(w.wq.dims()) + "/" +
                         dims_to_string(w.wk.dims()) + " for d=" + std::to_string(d));
    if (w.bq.ndim() != 1 || w.bq.dim(0) != d || !w.bq.same_dims(w.bk))
        throw ShapeError("attention: bias extents for d=" + std::to_string(d));
    if (!pe.same_dims(f.values))
        throw ShapeError("attention: position code " + dims_to_string(pe.dims()) + " vs features " +
                         dims_to_string(f.values.dims()));
}

// Projection q = (f + pe) * w + b, returned batch-major for the given axis:
// (H, W, D) for horizontal, (W, H, D) for vertical.
Grid project_batched(const Grid& f, const Grid& pe, const Grid& w, const Grid& b, Axis axis) {
    Grid sum = add(f, pe);
    Grid q = affine_last(sum, w, &b);
    sum.release();
    if (axis == Axis::Vertical) return permute(q, {1, 0, 2});
    return q;
}

// Scaled logits + softmax; consumes q/k and returns the row-stochastic
// matrix in batch-major layout, which is exactly the AttentionMatrix layout.
Grid attention_matrix_batched(Grid qb, Grid kb, int d) {
    Grid kbt = transpose_last2(kb);
    kb.release();
    Grid logits = matmul_last2(qb, kbt);
    qb.release();
    kbt.release();
    scale_inplace(logits, 1.0f / std::sqrt(static_cast<float>(d)));
    softmax_last_inplace(logits);
    return logits;
}

Grid aggregate_batched(const Grid& a, const Grid& f, Axis axis) {
    if (axis == Axis::Vertical) {
        Grid fv = permute(f, {1, 0, 2});
        Grid outb = matmul_last2(a, fv);
        fv.release();
        return permute(outb, {1, 0, 2});
    }
    return matmul_last2(a, f);
}

}  // namespace

AttentionWeights zero_attention_weights(int d) {
    if (d <= 0) throw ShapeError("attention weights: d must be positive");
    return AttentionWeights{Grid({d, d}), Grid({d, d}), Grid({d}), Grid({d})};
}

AttentionWeights random_attention_weights(int d, std::uint64_t seed) {
    AttentionWeights w = zero_attention_weights(d);
    Rng rng(seed);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(d));
    rng.fill_gaussian(w.wq, stddev);
    rng.fill_gaussian(w.wk, stddev);
    rng.fill_gaussian(w.bq, stddev);
    rng.fill_gaussian(w.bk, stddev);
    return w;
}

Grid positional_encoding(int h, int w, int d) {
    if (h <= 0 || w <= 0) throw ShapeError("positional_encoding: non-positive extents");
    if (d < 4 || d % 4 != 0)
        throw ShapeError("positional_encoding: d=" + std::to_string(d) + " must be divisible by 4");
    Grid pe({h, w, d});
    const int pairs = d / 4;
    std::vector<double> inv_freq(static_cast<std::size_t>(pairs));
    for (int k = 0; k < pairs; ++k)
        inv_freq[static_cast<std::size_t>(k)] =
            std::pow(kTemperatureBase, -4.0 * static_cast<double>(k) / static_cast<double>(d));
    for (int y = 0; y < h; ++y) {
        const double ty = kTwoPi * (static_cast<double>(y) + 0.5) / static_cast<double>(h);
        for (int x = 0; x < w; ++x) {
            const double tx = kTwoPi * (static_cast<double>(x) + 0.5) / static_cast<double>(w);
            float* p = pe.data() + (static_cast<std::size_t>(y) * w + x) * d;
            for (int k = 0; k < pairs; ++k) {
                const double ay = ty * inv_freq[static_cast<std::size_t>(k)];
                const double ax = tx * inv_freq[static_cast<std::size_t>(k)];
                p[2 * k] = static_cast<float>(std::sin(ay));
                p[2 * k + 1] = static_cast<float>(std::cos(ay));
                p[d / 2 + 2 * k] = static_cast<float>(std::sin(ax));
                p[d / 2 + 2 * k + 1] = static_cast<float>(std::cos(ax));
            }
        }
    }
    return pe;
}

FeatureMap self_attention_1d(const FeatureMap& f, Axis axis, const AttentionWeights& w,
                             const Grid& pe) {
    check_attention_inputs(f, w, pe);
    Grid qb = project_batched(f.values, pe, w.wq, w.bq, axis);
    Grid kb = project_batched(f.values, pe, w.wk, w.bk, axis);
    Grid a = attention_matrix_batched(std::move(qb), std::move(kb), f.d());
    return FeatureMap(aggregate_batched(a, f.values, axis));
}

std::pair<FeatureMap, AttentionMatrix> cross_attention_1d(const FeatureMap& f1a,
                                                          const FeatureMap& f2, Axis axis,
                                                          const AttentionWeights& w,
                                                          const Grid& pe) {
    check_attention_inputs(f1a, w, pe);
    if (!f1a.values.same_dims(f2.values))
        throw ShapeError("cross attention: feature extents " + dims_to_string(f1a.values.dims()) +
                         " vs " + dims_to_string(f2.values.dims()));
    Grid qb = project_batched(f1a.values, pe, w.wq, w.bq, axis);
    Grid kb = project_batched(f2.values, pe, w.wk, w.bk, axis);
    Grid a = attention_matrix_batched(std::move(qb), std::move(kb), f1a.d());
    FeatureMap out(aggregate_batched(a, f2.values, axis));
    return {std::move(out), AttentionMatrix{axis, std::move(a)}};
}

FeatureMap apply_attention(const AttentionMatrix& a, const FeatureMap& f2) {
    const int h = f2.h(), w = f2.w();
    if (a.axis == Axis::Vertical) {
        if (a.values.ndim() != 3 || a.values.dim(0) != w || a.values.dim(1) != h ||
            a.values.dim(2) != h)
            throw ShapeError("apply_attention: vertical matrix " + dims_to_string(a.values.dims()) +
                             " vs features " + dims_to_string(f2.values.dims()));
    } else {
        if (a.values.ndim() != 3 || a.values.dim(0) != h || a.values.dim(1) != w ||
            a.values.dim(2) != w)
            throw ShapeError("apply_attention: horizontal matrix " + dims_to_string(a.values.dims()) +
                             " vs features " + dims_to_string(f2.values.dims()));
    }
    return FeatureMap(aggregate_batched(a.values, f2.values, a.axis));
}

AttendGrads attend_vjp(const FeatureMap& f1a, const FeatureMap& f2, Axis axis,
                       const AttentionWeights& w, const Grid& pe, const Grid& upstream) {
    check_attention_inputs(f1a, w, pe);
    if (!f1a.values.same_dims(f2.values) || !upstream.same_dims(f1a.values))
        throw ShapeError("attend_vjp: extents " + dims_to_string(f1a.values.dims()) + " / " +
                         dims_to_string(f2.values.dims()) + " / " + dims_to_string(upstream.dims()));
    const int h = f1a.h(), wid = f1a.w(), d = f1a.d();
    const bool vertical = axis == Axis::Vertical;
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));

    // Forward intermediates.
    Grid fp1 = add(f1a.values, pe);
    Grid fp2 = add(f2.values, pe);
    Grid q = affine_last(fp1, w.wq, &w.bq);
    Grid k = affine_last(fp2, w.wk, &w.bk);
    Grid qb = vertical ? permute(q, {1, 0, 2}) : q;
    Grid kb = vertical ? permute(k, {1, 0, 2}) : k;
    Grid vb = vertical ? permute(f2.values, {1, 0, 2}) : f2.values;
    Grid upb = vertical ? permute(upstream, {1, 0, 2}) : upstream;

    Grid a;
    {
        Grid kbt = transpose_last2(kb);
        a = matmul_last2(qb, kbt);
        scale_inplace(a, inv_sqrt_d);
        softmax_last_inplace(a);
    }

    // Backward through aggregation: out = A * V.
    Grid da = matmul_last2(upb, transpose_last2(vb));
    Grid dvb = matmul_last2(transpose_last2(a), upb);

    // Softmax backward with the logit scale folded in:
    // dS = (1/sqrt(D)) * A o (dA - rowsum(dA o A)).
    Grid ds(a.dims());
    {
        const int n = a.dim(2);
        const float* pa = a.data();
        const float* pda = da.data();
        float* pds = ds.data();
        std::size_t rows = a.size() / static_cast<std::size_t>(n);
        for (std::size_t r = 0; r < rows; ++r) {
            const float* arow = pa + r * static_cast<std::size_t>(n);
            const float* darow = pda + r * static_cast<std::size_t>(n);
            float* dsrow = pds + r * static_cast<std::size_t>(n);
            float dot = 0.0f;
            for (int i = 0; i < n; ++i) dot += arow[i] * darow[i];
            for (int i = 0; i < n; ++i) dsrow[i] = inv_sqrt_d * arow[i] * (darow[i] - dot);
        }
    }
    da.release();

    Grid dqb = matmul_last2(ds, kb);
    Grid dkb = matmul_last2(transpose_last2(ds), qb);
    ds.release();

    Grid dq = vertical ? permute(dqb, {1, 0, 2}) : std::move(dqb);
    Grid dk = vertical ? permute(dkb, {1, 0, 2}) : std::move(dkb);
    Grid dvalue = vertical ? permute(dvb, {1, 0, 2}) : std::move(dvb);

    AttendGrads g;
    const int hw = h * wid;
    {
        Grid fp1m = reshape(std::move(fp1), {1, hw, d});
        Grid dqm = reshape(dq, {1, hw, d});
        g.wq = reshape(matmul_last2(transpose_last2(fp1m), dqm), {d, d});
    }
    {
        Grid fp2m = reshape(std::move(fp2), {1, hw, d});
        Grid dkm = reshape(dk, {1, hw, d});
        g.wk = reshape(matmul_last2(transpose_last2(fp2m), dkm), {d, d});
    }
    g.bq = Grid({d});
    g.bk = Grid({d});
    for (int px = 0; px < hw; ++px)
        for (int c = 0; c < d; ++c) {
            g.bq(c) += dq.data()[static_cast<std::size_t>(px) * d + c];
            g.bk(c) += dk.data()[static_cast<std::size_t>(px) * d + c];
        }

    Grid wqt = permute(w.wq, {1, 0});
    Grid wkt = permute(w.wk, {1, 0});
    g.f1a = affine_last(dq, wqt);
    Grid df2_keys = affine_last(dk, wkt);
    add_inplace(dvalue, df2_keys);
    g.f2 = std::move(dvalue);
    return g;
}

}  // namespace axflow
