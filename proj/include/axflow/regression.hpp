#pragma once

#include <cstdint>
#include <vector>

#include "axflow/costvolume.hpp"
#include "axflow/types.hpp"
#include "axflow/weights_io.hpp"

namespace axflow {

// Channel widths of the update operator. These are configuration defaults,
// not tuned values.
struct RegressionConfig {
    int dm = 64;    // motion feature channels
    int dh = 96;    // hidden state channels
    int dc = 64;    // context channels
    int dhead = 128;  // flow head hidden channels
};

// The named tensors the update operator consumes. All layers are bias free;
// per-pixel linear weights are (Cin, Cout), 3x3 conv kernels are
// (3, 3, Cin, Cout).
struct RegressionWeights {
    Grid ctx_l1;               // (D, Dc)
    Grid motion_l1, motion_l2; // (2*(2R+1)+2, Dm), (Dm, Dm)
    Grid gru_kz, gru_kr, gru_kh;  // (3, 3, Dh+Dc+Dm, Dh)
    Grid head_l1, head_l2;     // (Dh, Dhead), (Dhead, 2)
};

// Tensor names used in weight files.
RegressionWeights regression_from_set(const WeightSet& set);
void regression_into_set(const RegressionWeights& w, WeightSet& set);

RegressionWeights zero_regression_weights(int d, int radius, const RegressionConfig& cfg = {});
// Deterministic Gaussian init, per-layer standard deviation 1/sqrt(fan_in).
RegressionWeights random_regression_weights(int d, int radius, std::uint64_t seed,
                                            const RegressionConfig& cfg = {});

// Recurrent state of the update operator. Hidden values stay strictly inside
// (-1, 1): each step is a convex blend of the previous state and a tanh.
struct UpdateState {
    Grid hidden;   // (H, W, Dh)
    Grid context;  // (H, W, Dc)
};

// Two per-pixel linear+ReLU layers over [slab || flow].
Grid motion_encode(const Grid& slab, const FlowField& flow, const Grid& w1, const Grid& w2);

// Gated recurrent step with 3x3 zero-padded convolutions:
// z = sigmoid(Kz * [h || x]), r = sigmoid(Kr * [h || x]),
// ht = tanh(Kh * [r o h || x]), h' = (1 - z) o h + z o ht, x = [context || motion].
void gru_update(UpdateState& state, const Grid& motion, const Grid& kz, const Grid& kr,
                const Grid& kh);

// Per-pixel linear+ReLU then a 2-channel linear producing a flow delta.
FlowField flow_head(const Grid& hidden, const Grid& w1, const Grid& w2);

// Zero-initialized flow and hidden state, n_iters rounds of
// lookup -> motion encoding -> recurrent update -> delta. Returns the flow
// after every iteration.
std::vector<FlowField> iterate(const FeatureMap& f1, const CostVolume3D& volh,
                               const CostVolume3D& volv, const RegressionWeights& w, int n_iters,
                               int radius);

// Non-learned solver: per-pixel displacement expectation under
// softmax(slab / tau) along each direction. Outputs lie in [-R, R].
FlowField softargmax_flow(const LookupSlab& hslab, const LookupSlab& vslab, float tau);

// Bilinear upsampling by an integer factor; displacement values are scaled
// by the same factor.
FlowField upsample_flow(const FlowField& flow, int factor);

// Zero-padded 3x3 convolution, kernel (3, 3, Cin, Cout).
Grid conv3x3(const Grid& input, const Grid& kernel);

}  // namespace axflow
