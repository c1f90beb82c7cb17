#pragma once

#include <cstdint>
#include <vector>

#include "axflow/attention.hpp"
#include "axflow/costvolume.hpp"
#include "axflow/types.hpp"

namespace axflow {

// Brute-force references for the factorized volume pipeline. Everything in
// this header recomputes results from first principles (plain loops, 64-bit
// accumulation where noted) and never calls into the fast paths it checks.

// Exhaustive 4-d matching volume, extents (H, W, H, W):
// values(h, w, i, j) = <f1(h, w), f2(i, j)> / sqrt(D), accumulated in f64.
// Refuses grids with H*W above the cap.
struct CostVolume4D {
    Grid values;
};
inline constexpr int kAllPairsCellCap = 1024;
CostVolume4D allpairs_4d(const FeatureMap& f1, const FeatureMap& f2);

// Evaluates one factorized volume entry by expanding the aggregation sum
// directly from the attention matrix and the raw features, in f64.
// For a vertical matrix this is the horizontal volume entry at displacement
// r from pixel (h, w): (1/sqrt(D)) sum_i A(w+r, h, i) <f1(h,w), f2(i, w+r)>.
// For a horizontal matrix it is the vertical volume entry:
// (1/sqrt(D)) sum_j A(h+r, w, j) <f1(h,w), f2(h+r, j)>.
// The displaced coordinate must be in range.
double expand_factorized(int h, int w, int r, const AttentionMatrix& a, const FeatureMap& f1,
                         const FeatureMap& f2);

// Hard attention that selects row h+delta (vertical) or column w+delta
// (horizontal), clamped to the frame. |delta| must be smaller than the
// attended extent.
AttentionMatrix oracle_attention(int delta, int h, int w, Axis axis = Axis::Vertical);

// f shifted by (dx, dy): out(y, x) = f(y-dy, x-dx), zero outside the frame.
FeatureMap shift_features(const FeatureMap& f, int dx, int dy);

// Interior pixels for translation experiments: both lookup windows fully in
// frame and the true correspondence in frame.
bool translation_interior(int y, int x, int h, int w, int radius, int dx, int dy);

// Builds the shifted pair, runs both oracle-attention pipelines at zero
// flow, and reports the fraction of interior pixels whose slab argmax equals
// the true displacement (x and y direction separately).
struct TranslationRates {
    double hit_x = 0.0;
    double hit_y = 0.0;
    std::size_t interior = 0;
};
TranslationRates translation_recovery(const FeatureMap& f, int dx, int dy, int radius);

// Everything needed to rebuild the concatenated slab of one pixel.
struct ProbePipeline {
    FeatureMap f1, f2;
    AttentionWeights self_h, self_v, cross_v, cross_h;
    Grid pe;
    int radius = 0;
};

// Recomputes pixel (y0, x0)'s concatenated zero-flow slab with f2 channel 0
// at (i, j) perturbed by +1 and reports whether any slab byte changed.
bool receptive_field_probe(const ProbePipeline& p, int y0, int x0, int i, int j);

// Expected influence region: the (2R+1)-wide row and column bands through
// (y0, x0).
bool in_cross_region(int i, int j, int y0, int x0, int radius);

// Probes every f2 position and returns the affected positions.
std::vector<std::pair<int, int>> receptive_field_affected(const ProbePipeline& p, int y0, int x0);

// f64 reference forwards (independent loop implementations).
std::vector<double> ref_cross_attention_f64(const std::vector<double>& f1a,
                                            const std::vector<double>& f2, int h, int w, int d,
                                            Axis axis, const std::vector<double>& wq,
                                            const std::vector<double>& wk,
                                            const std::vector<double>& bq,
                                            const std::vector<double>& bk,
                                            const std::vector<double>& pe);
std::vector<double> ref_correlate_f64(const std::vector<double>& f1, const std::vector<double>& f2,
                                      int h, int w, int d, Axis axis);

// Central finite-difference checks (f64 forwards, step 1e-3) of the analytic
// VJPs on seeded random instances. Returns the worst per-tensor error
// max|analytic - fd| / max(max|fd|, max|analytic|, 1), over both axes. The
// floor of 1 covers tensors whose true gradient is identically zero.
double gradcheck_attention(int h, int w, int d, std::uint64_t seed);
double gradcheck_correlation(int h, int w, int d, std::uint64_t seed);

}  // namespace axflow
