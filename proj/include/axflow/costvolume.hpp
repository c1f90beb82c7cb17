#pragma once

#include "axflow/types.hpp"

namespace axflow {

// Full single-direction matching volume. For Axis::Horizontal the extents
// are (H, W, W): values(h, w, k) = <f1(h, w), f2agg(h, k)> / sqrt(D), i.e.
// candidate columns k for the pixel at (h, w). For Axis::Vertical they are
// (H, W, H): values(h, w, k) = <f1(h, w), f2agg(k, w)> / sqrt(D), candidate
// rows k. The displacement axis is always the last one.
struct CostVolume3D {
    Axis direction = Axis::Horizontal;
    Grid values;
};

// Window of matching costs gathered around per-pixel flow, extents
// (H, W, 2R+1); channel R+r holds displacement r.
struct LookupSlab {
    int radius = 0;
    Grid values;
};

// Batched matrix product of f1 against the aggregated target features along
// one direction, scaled by 1/sqrt(D). Evaluated in place (no transposed
// copy of the inputs is materialized).
CostVolume3D correlate_full(const FeatureMap& f1, const FeatureMap& f2agg, Axis direction);

// Samples the volume's displacement axis at (center + flow + r) for
// r in [-R, R], where center is the pixel's own column (horizontal) or row
// (vertical). Fractional positions use 1-d linear interpolation; positions
// outside the axis contribute zero. Flow must be finite.
LookupSlab lookup(const CostVolume3D& cv, const FlowField& flow, int radius);

// Concatenates the horizontal slab then the vertical slab along channels,
// giving (H, W, 2*(2R+1)).
Grid concat_lookups(const LookupSlab& horizontal, const LookupSlab& vertical);

// Gradients of sum(upstream * volume) with respect to both feature maps.
struct CorrelateGrads {
    Grid f1, f2agg;
};
CorrelateGrads correlate_vjp(const FeatureMap& f1, const FeatureMap& f2agg, Axis direction,
                             const Grid& upstream);

}  // namespace axflow
