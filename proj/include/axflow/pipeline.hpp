#pragma once

#include <cstdint>

#include "axflow/attention.hpp"
#include "axflow/costvolume.hpp"
#include "axflow/regression.hpp"
#include "axflow/types.hpp"
#include "axflow/weights_io.hpp"

namespace axflow {

// Attention blocks feeding the two matching volumes. Each self block runs on
// the source features along one axis and provides the queries for the cross
// block on the orthogonal axis: self_h feeds cross_v (whose output is matched
// horizontally) and self_v feeds cross_h (matched vertically).
struct VolumeWeights {
    AttentionWeights self_h, self_v, cross_v, cross_h;
};

VolumeWeights zero_volume_weights(int d);
VolumeWeights random_volume_weights(int d, std::uint64_t seed);

// Tensor names: attn.{self_h,self_v,cross_v,cross_h}.{wq,wk,bq,bk}.
VolumeWeights volume_weights_from_set(const WeightSet& set);
void volume_weights_into_set(const VolumeWeights& w, WeightSet& set);

// Complete model: attention blocks plus the recurrent update operator.
struct ModelWeights {
    VolumeWeights volume;
    RegressionWeights regression;
};

ModelWeights zero_model_weights(int d, int radius, const RegressionConfig& cfg = {});
ModelWeights random_model_weights(int d, int radius, std::uint64_t seed,
                                  const RegressionConfig& cfg = {});
ModelWeights model_from_set(const WeightSet& set);
WeightSet model_into_set(const ModelWeights& w);

// Both matching volumes for a feature pair. The cross attention matrices are
// kept only on request (they are as large as the volumes themselves).
struct CostVolumePair {
    CostVolume3D horizontal;     // (H, W, W)
    CostVolume3D vertical;       // (H, W, H)
    AttentionMatrix cross_v;     // empty unless kept
    AttentionMatrix cross_h;     // empty unless kept
};

// Learned path: self attention on f1, cross attention on f2, then a full
// correlation per direction. The smaller volume is built first so the peak
// footprint matches predicted_peak_bytes.
CostVolumePair build_cost_volumes(const FeatureMap& f1, const FeatureMap& f2,
                                  const VolumeWeights& w, bool keep_attention = false);

// Hard-attention path for a known integer shift f2(y, x) = f1(y-dy, x-dx):
// the vertical cross block selects row h+dy, the horizontal one column w+dx.
CostVolumePair build_cost_volumes_oracle(const FeatureMap& f1, const FeatureMap& f2, int dx,
                                         int dy, bool keep_attention = false);

// Identity-attention path: correlates f1 against raw f2 along each axis (no
// aggregation), the non-learned baseline.
CostVolumePair build_cost_volumes_identity(const FeatureMap& f1, const FeatureMap& f2);

// Peak tracked bytes of build_cost_volumes measured from a baseline where
// only the two input maps are alive. The live set is dominated by the two
// volumes, the attention matrices (same scale) and a handful of feature-map
// temporaries; this formula is the documented contract of the build order
// and is checked against the allocator in the tests.
std::size_t predicted_peak_bytes(int h, int w, int d);

}  // namespace axflow
