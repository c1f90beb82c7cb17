#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "axflow/grid.hpp"

namespace axflow {

// Seeded generator with hand-rolled uniform/Gaussian draws so streams are
// reproducible across standard library implementations (std distributions
// are not pinned by the standard).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

    // Uniform in [0, 1) with 24 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 8) * (1.0 / 16777216.0); }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 1.0 / 16777216.0;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.28318530717958647692 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    void fill_gaussian(Grid& g, double stddev) {
        float* p = g.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            p[i] = static_cast<float>(gaussian() * stddev);
    }

    // Fills (H, W, D) with per-cell unit-norm Gaussian directions.
    void fill_unit_features(Grid& g) {
        if (g.ndim() != 3) throw ShapeError("fill_unit_features: expected 3-d grid");
        const int d = g.dim(2);
        float* p = g.data();
        std::size_t cells = g.size() / static_cast<std::size_t>(d);
        for (std::size_t cell = 0; cell < cells; ++cell) {
            float* v = p + cell * static_cast<std::size_t>(d);
            float norm2 = 0.0f;
            for (int c = 0; c < d; ++c) {
                v[c] = static_cast<float>(gaussian());
                norm2 += v[c] * v[c];
            }
            if (norm2 > 0.0f) {
                const float inv = 1.0f / std::sqrt(norm2);
                for (int c = 0; c < d; ++c) v[c] *= inv;
            } else {
                v[0] = 1.0f;
            }
        }
    }

  private:
    std::mt19937 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace axflow
