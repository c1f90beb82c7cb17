#pragma once

#include <cstdint>
#include <utility>

#include "axflow/types.hpp"

namespace axflow {

// Query/key projection weights for one attention block. wq/wk are (D, D)
// and act on row vectors (q = (f + pe) * wq + bq); bq/bk have extent D.
// There is no value projection: attention weights multiply raw features.
struct AttentionWeights {
    Grid wq, wk, bq, bk;
};

// Zero-initialized block (uniform attention).
AttentionWeights zero_attention_weights(int d);

// Deterministic Gaussian init, standard deviation 1/sqrt(d).
AttentionWeights random_attention_weights(int d, std::uint64_t seed);

// Row-stochastic attention matrix. For Axis::Vertical the extents are
// (W, H, H) with values(w, h, i) the weight pixel (h, w) puts on row i of
// column w; for Axis::Horizontal they are (H, W, W) with values(h, w, j) the
// weight pixel (h, w) puts on column j of row h.
struct AttentionMatrix {
    Axis axis = Axis::Vertical;
    Grid values;
};

// Sinusoidal 2-d position code, extents (H, W, D) with D divisible by 4.
// Channels [0, D/2) encode the row index, channels [D/2, D) the column index.
// Within each half, pair k holds (sin(theta / T^(4k/D)), cos(theta / T^(4k/D)))
// with theta = 2*pi*(p + 0.5)/N for coordinate p of extent N and T = 10000.
Grid positional_encoding(int h, int w, int d);

// Softmax attention along one axis of a single feature map; queries and keys
// are projections of f + pe, the aggregation mixes raw f. Logits are scaled
// by 1/sqrt(D).
FeatureMap self_attention_1d(const FeatureMap& f, Axis axis, const AttentionWeights& w,
                             const Grid& pe);

// Cross attention: queries from f1a + pe, keys from f2 + pe, values raw f2.
// Returns the aggregated target features and the attention matrix.
std::pair<FeatureMap, AttentionMatrix> cross_attention_1d(const FeatureMap& f1a,
                                                          const FeatureMap& f2, Axis axis,
                                                          const AttentionWeights& w,
                                                          const Grid& pe);

// Applies an existing attention matrix to a feature map (the aggregation
// step of cross_attention_1d on its own).
FeatureMap apply_attention(const AttentionMatrix& a, const FeatureMap& f2);

// Gradients of sum(upstream * f2_aggregated) for cross_attention_1d.
struct AttendGrads {
    Grid f1a, f2, wq, wk, bq, bk;
};
AttendGrads attend_vjp(const FeatureMap& f1a, const FeatureMap& f2, Axis axis,
                       const AttentionWeights& w, const Grid& pe, const Grid& upstream);

}  // namespace axflow
