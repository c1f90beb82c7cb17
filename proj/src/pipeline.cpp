#include "axflow/pipeline.hpp"

#include <algorithm>
#include <utility>

#include "axflow/oracle.hpp"

namespace axflow {

VolumeWeights zero_volume_weights(int d) {
    return {zero_attention_weights(d), zero_attention_weights(d), zero_attention_weights(d),
            zero_attention_weights(d)};
}

VolumeWeights random_volume_weights(int d, std::uint64_t seed) {
    return {random_attention_weights(d, seed), random_attention_weights(d, seed + 1),
            random_attention_weights(d, seed + 2), random_attention_weights(d, seed + 3)};
}

namespace {

const char* const kBlockNames[4] = {"self_h", "self_v", "cross_v", "cross_h"};

}  // namespace

VolumeWeights volume_weights_from_set(const WeightSet& set) {
    VolumeWeights w;
    AttentionWeights* blocks[4] = {&w.self_h, &w.self_v, &w.cross_v, &w.cross_h};
    for (int i = 0; i < 4; ++i) {
        const std::string base = std::string("attn.") + kBlockNames[i] + ".";
        blocks[i]->wq = weight(set, base + "wq");
        blocks[i]->wk = weight(set, base + "wk");
        blocks[i]->bq = weight(set, base + "bq");
        blocks[i]->bk = weight(set, base + "bk");
    }
    return w;
}

void volume_weights_into_set(const VolumeWeights& w, WeightSet& set) {
    const AttentionWeights* blocks[4] = {&w.self_h, &w.self_v, &w.cross_v, &w.cross_h};
    for (int i = 0; i < 4; ++i) {
        const std::string base = std::string("attn.") + kBlockNames[i] + ".";
        set[base + "wq"] = blocks[i]->wq;
        set[base + "wk"] = blocks[i]->wk;
        set[base + "bq"] = blocks[i]->bq;
        set[base + "bk"] = blocks[i]->bk;
    }
}

ModelWeights zero_model_weights(int d, int radius, const RegressionConfig& cfg) {
    return {zero_volume_weights(d), zero_regression_weights(d, radius, cfg)};
}

ModelWeights random_model_weights(int d, int radius, std::uint64_t seed,
                                  const RegressionConfig& cfg) {
    return {random_volume_weights(d, seed), random_regression_weights(d, radius, seed + 16, cfg)};
}

ModelWeights model_from_set(const WeightSet& set) {
    return {volume_weights_from_set(set), regression_from_set(set)};
}

WeightSet model_into_set(const ModelWeights& w) {
    WeightSet set;
    volume_weights_into_set(w.volume, set);
    regression_into_set(w.regression, set);
    return set;
}

namespace {

// One direction of the learned path: self attention on f1 along the axis
// orthogonal to `direction`, cross attention on f2 along that same axis, then
// the full correlation along `direction`.
CostVolume3D build_one_volume(const FeatureMap& f1, const FeatureMap& f2, Axis direction,
                              const AttentionWeights& self_w, const AttentionWeights& cross_w,
                              const Grid& pe, bool keep_attention, AttentionMatrix* kept) {
    const Axis cross_axis = direction == Axis::Horizontal ? Axis::Vertical : Axis::Horizontal;
    const Axis self_axis = direction;  // orthogonal to cross_axis
    FeatureMap queries = self_attention_1d(f1, self_axis, self_w, pe);
    auto [aggregated, attention] = cross_attention_1d(queries, f2, cross_axis, cross_w, pe);
    queries.values.release();
    if (keep_attention)
        *kept = std::move(attention);
    else
        attention.values.release();
    CostVolume3D volume = correlate_full(f1, aggregated, direction);
    return volume;
}

}  // namespace

CostVolumePair build_cost_volumes(const FeatureMap& f1, const FeatureMap& f2,
                                  const VolumeWeights& w, bool keep_attention) {
    if (!f1.values.same_dims(f2.values))
        throw ShapeError("build_cost_volumes: feature extents differ, " +
                         dims_to_string(f1.values.dims()) + " vs " +
                         dims_to_string(f2.values.dims()));
    const int h = f1.h(), wd = f1.w();
    Grid pe = positional_encoding(h, wd, f1.d());
    CostVolumePair out;
    if (h <= wd) {
        out.vertical = build_one_volume(f1, f2, Axis::Vertical, w.self_v, w.cross_h, pe,
                                        keep_attention, &out.cross_h);
        out.horizontal = build_one_volume(f1, f2, Axis::Horizontal, w.self_h, w.cross_v, pe,
                                          keep_attention, &out.cross_v);
    } else {
        out.horizontal = build_one_volume(f1, f2, Axis::Horizontal, w.self_h, w.cross_v, pe,
                                          keep_attention, &out.cross_v);
        out.vertical = build_one_volume(f1, f2, Axis::Vertical, w.self_v, w.cross_h, pe,
                                        keep_attention, &out.cross_h);
    }
    return out;
}

CostVolumePair build_cost_volumes_oracle(const FeatureMap& f1, const FeatureMap& f2, int dx,
                                         int dy, bool keep_attention) {
    if (!f1.values.same_dims(f2.values))
        throw ShapeError("build_cost_volumes_oracle: feature extents differ");
    const int h = f1.h(), wd = f1.w();
    CostVolumePair out;
    auto build = [&](Axis direction) {
        // The cross block runs on the axis orthogonal to the matching
        // direction and selects the true displacement along that axis.
        const Axis cross_axis = direction == Axis::Horizontal ? Axis::Vertical : Axis::Horizontal;
        const int delta = cross_axis == Axis::Vertical ? dy : dx;
        AttentionMatrix a = oracle_attention(delta, h, wd, cross_axis);
        FeatureMap aggregated = apply_attention(a, f2);
        if (keep_attention) {
            (direction == Axis::Horizontal ? out.cross_v : out.cross_h) = std::move(a);
        } else {
            a.values.release();
        }
        CostVolume3D volume = correlate_full(f1, aggregated, direction);
        (direction == Axis::Horizontal ? out.horizontal : out.vertical) = std::move(volume);
    };
    if (h <= wd) {
        build(Axis::Vertical);
        build(Axis::Horizontal);
    } else {
        build(Axis::Horizontal);
        build(Axis::Vertical);
    }
    return out;
}

CostVolumePair build_cost_volumes_identity(const FeatureMap& f1, const FeatureMap& f2) {
    if (!f1.values.same_dims(f2.values))
        throw ShapeError("build_cost_volumes_identity: feature extents differ");
    CostVolumePair out;
    if (f1.h() <= f1.w()) {
        out.vertical = correlate_full(f1, f2, Axis::Vertical);
        out.horizontal = correlate_full(f1, f2, Axis::Horizontal);
    } else {
        out.horizontal = correlate_full(f1, f2, Axis::Horizontal);
        out.vertical = correlate_full(f1, f2, Axis::Vertical);
    }
    return out;
}

std::size_t predicted_peak_bytes(int h, int w, int d) {
    if (h <= 0 || w <= 0 || d <= 0) throw ValueError("predicted_peak_bytes: non-positive extents");
    const std::size_t cells = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    const std::size_t fmap = cells * static_cast<std::size_t>(d);      // one feature map
    const std::size_t small_vol = cells * static_cast<std::size_t>(std::min(h, w));
    const std::size_t large_vol = cells * static_cast<std::size_t>(std::max(h, w));
    // Live-set maxima of build_cost_volumes, from a baseline holding f1 and
    // f2. Candidates, in build order:
    //   first pass, cross projection:   7 fmaps (f1 f2 pe q1 q sum k)
    //   first pass, attention product:  6 fmaps + large attention matrix
    //   second pass, cross projection:  7 fmaps + small volume
    //   second pass, self attention:    5 fmaps + small volume + large matrix
    //   second pass, attention product: 6 fmaps + small volume + small matrix
    //   second pass, correlation:       4 fmaps + both volumes
    const std::size_t candidates[5] = {
        7 * fmap + small_vol,
        6 * fmap + large_vol,
        5 * fmap + small_vol + large_vol,
        6 * fmap + 2 * small_vol,
        4 * fmap + small_vol + large_vol,
    };
    std::size_t peak = 0;
    for (std::size_t c : candidates) peak = std::max(peak, c);
    return peak * sizeof(float);
}

}  // namespace axflow
