#pragma once

#include <string>

#include "axflow/grid.hpp"

namespace axflow {

// Axis of a 1-d operation. For attention this is the direction the softmax
// runs along; for a cost volume it is the direction of the displacement axis.
// Note the pairing: a horizontal cost volume is built from vertically
// aggregated target features, and vice versa.
enum class Axis { Horizontal, Vertical };

inline const char* axis_name(Axis a) { return a == Axis::Horizontal ? "horizontal" : "vertical"; }

// Per-cell feature map, extents (H, W, D).
struct FeatureMap {
    Grid values;

    FeatureMap() = default;
    explicit FeatureMap(Grid g) : values(std::move(g)) {
        if (values.ndim() != 3)
            throw ShapeError("feature map: expected 3-d grid, got " + dims_to_string(values.dims()));
    }
    int h() const { return values.dim(0); }
    int w() const { return values.dim(1); }
    int d() const { return values.dim(2); }
};

// Dense flow field, extents (H, W, 2) with channel 0 = x displacement,
// channel 1 = y displacement.
struct FlowField {
    Grid values;

    FlowField() = default;
    explicit FlowField(Grid g) : values(std::move(g)) {
        if (values.ndim() != 3 || values.dim(2) != 2)
            throw ShapeError("flow field: expected (H,W,2) grid, got " + dims_to_string(values.dims()));
    }
    static FlowField zeros(int h, int w) { return FlowField(Grid({h, w, 2})); }
    int h() const { return values.dim(0); }
    int w() const { return values.dim(1); }
};

}  // namespace axflow
