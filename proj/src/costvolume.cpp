#include "axflow/costvolume.hpp"

#include <cmath>

namespace axflow {

namespace {

void check_pair(const FeatureMap& f1, const FeatureMap& f2agg) {
    if (!f1.values.same_dims(f2agg.values))
        throw ShapeError("correlate: feature extents " + dims_to_string(f1.values.dims()) + " vs " +
                         dims_to_string(f2agg.values.dims()));
}

}  // namespace

CostVolume3D correlate_full(const FeatureMap& f1, const FeatureMap& f2agg, Axis direction) {
    check_pair(f1, f2agg);
    const int h = f1.h(), w = f1.w(), d = f1.d();
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));
    const float* p1 = f1.values.data();
    const float* p2 = f2agg.values.data();

    if (direction == Axis::Horizontal) {
        Grid vol({h, w, w});
        float* pv = vol.data();
        parallel_for(static_cast<std::size_t>(h), [&](std::size_t begin, std::size_t end) {
            for (std::size_t row = begin; row < end; ++row) {
                const float* f1row = p1 + row * static_cast<std::size_t>(w) * d;
                const float* f2row = p2 + row * static_cast<std::size_t>(w) * d;
                float* vrow = pv + row * static_cast<std::size_t>(w) * w;
                for (int x = 0; x < w; ++x) {
                    const float* a = f1row + static_cast<std::size_t>(x) * d;
                    for (int k = 0; k < w; ++k) {
                        const float* b = f2row + static_cast<std::size_t>(k) * d;
                        float acc = 0.0f;
                        for (int c = 0; c < d; ++c) acc += a[c] * b[c];
                        vrow[static_cast<std::size_t>(x) * w + k] = acc * inv_sqrt_d;
                    }
                }
            }
        });
        return CostVolume3D{direction, std::move(vol)};
    }

    Grid vol({h, w, h});
    float* pv = vol.data();
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
            for (int x = 0; x < w; ++x) {
                const float* a = p1 + (row * static_cast<std::size_t>(w) + x) * d;
                float* vrow = pv + (row * static_cast<std::size_t>(w) + x) * h;
                for (int k = 0; k < h; ++k) {
                    const float* b = p2 + (static_cast<std::size_t>(k) * w + x) * d;
                    float acc = 0.0f;
                    for (int c = 0; c < d; ++c) acc += a[c] * b[c];
                    vrow[k] = acc * inv_sqrt_d;
                }
            }
        }
    });
    return CostVolume3D{direction, std::move(vol)};
}

LookupSlab lookup(const CostVolume3D& cv, const FlowField& flow, int radius) {
    if (radius < 0) throw ValueError("lookup: negative radius");
    const Grid& vol = cv.values;
    if (vol.ndim() != 3)
        throw ShapeError("lookup: volume extents " + dims_to_string(vol.dims()));
    const int h = vol.dim(0), w = vol.dim(1), n = vol.dim(2);
    if (flow.h() != h || flow.w() != w)
        throw ShapeError("lookup: flow " + dims_to_string(flow.values.dims()) + " vs volume " +
                         dims_to_string(vol.dims()));
    if (!all_finite(flow.values)) throw ValueError("lookup: non-finite flow");

    const bool horizontal = cv.direction == Axis::Horizontal;
    const int span = 2 * radius + 1;
    Grid slab({h, w, span});
    const float* pv = vol.data();
    const float* pf = flow.values.data();
    float* ps = slab.data();
    parallel_for(static_cast<std::size_t>(h) * w, [&](std::size_t begin, std::size_t end) {
        for (std::size_t px = begin; px < end; ++px) {
            const int y = static_cast<int>(px) / w;
            const int x = static_cast<int>(px) % w;
            const float disp = horizontal ? pf[px * 2] : pf[px * 2 + 1];
            const float base = static_cast<float>(horizontal ? x : y) + disp;
            const float* vrow = pv + px * static_cast<std::size_t>(n);
            float* srow = ps + px * static_cast<std::size_t>(span);
            for (int r = -radius; r <= radius; ++r) {
                const float pos = base + static_cast<float>(r);
                const float fl = std::floor(pos);
                const int i0 = static_cast<int>(fl);
                const float t = pos - fl;
                float v = 0.0f;
                if (i0 >= 0 && i0 < n) v += (1.0f - t) * vrow[i0];
                if (t != 0.0f && i0 + 1 >= 0 && i0 + 1 < n) v += t * vrow[i0 + 1];
                srow[r + radius] = v;
            }
        }
    });
    return LookupSlab{radius, std::move(slab)};
}

Grid concat_lookups(const LookupSlab& horizontal, const LookupSlab& vertical) {
    if (horizontal.radius != vertical.radius)
        throw ShapeError("concat_lookups: radius " + std::to_string(horizontal.radius) + " vs " +
                         std::to_string(vertical.radius));
    return concat_last(horizontal.values, vertical.values);
}

CorrelateGrads correlate_vjp(const FeatureMap& f1, const FeatureMap& f2agg, Axis direction,
                             const Grid& upstream) {
    check_pair(f1, f2agg);
    const int h = f1.h(), w = f1.w(), d = f1.d();
    const int n = direction == Axis::Horizontal ? w : h;
    if (upstream.ndim() != 3 || upstream.dim(0) != h || upstream.dim(1) != w || upstream.dim(2) != n)
        throw ShapeError("correlate_vjp: upstream extents " + dims_to_string(upstream.dims()));
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));

    CorrelateGrads g{Grid({h, w, d}), Grid({h, w, d})};
    const float* p1 = f1.values.data();
    const float* p2 = f2agg.values.data();
    const float* pu = upstream.data();
    float* d1 = g.f1.data();
    float* d2 = g.f2agg.data();

    if (direction == Axis::Horizontal) {
        // d f1(h,w) = (1/sqrt(D)) sum_k up(h,w,k) f2agg(h,k)
        // d f2agg(h,k) = (1/sqrt(D)) sum_w up(h,w,k) f1(h,w)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float* urow = pu + (static_cast<std::size_t>(y) * w + x) * n;
                float* g1 = d1 + (static_cast<std::size_t>(y) * w + x) * d;
                const float* a = p1 + (static_cast<std::size_t>(y) * w + x) * d;
                for (int k = 0; k < n; ++k) {
                    const float uv = urow[k] * inv_sqrt_d;
                    const float* b = p2 + (static_cast<std::size_t>(y) * w + k) * d;
                    float* g2 = d2 + (static_cast<std::size_t>(y) * w + k) * d;
                    for (int c = 0; c < d; ++c) {
                        g1[c] += uv * b[c];
                        g2[c] += uv * a[c];
                    }
                }
            }
    } else {
        // d f1(h,w) = (1/sqrt(D)) sum_k up(h,w,k) f2agg(k,w)
        // d f2agg(k,w) = (1/sqrt(D)) sum_h up(h,w,k) f1(h,w)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float* urow = pu + (static_cast<std::size_t>(y) * w + x) * n;
                float* g1 = d1 + (static_cast<std::size_t>(y) * w + x) * d;
                const float* a = p1 + (static_cast<std::size_t>(y) * w + x) * d;
                for (int k = 0; k < n; ++k) {
                    const float uv = urow[k] * inv_sqrt_d;
                    const float* b = p2 + (static_cast<std::size_t>(k) * w + x) * d;
                    float* g2 = d2 + (static_cast<std::size_t>(k) * w + x) * d;
                    for (int c = 0; c < d; ++c) {
                        g1[c] += uv * b[c];
                        g2[c] += uv * a[c];
                    }
                }
            }
    }
    return g;
}

}  // namespace axflow
