#pragma once

#include <cstdint>
#include <string>

#include "crowdloc/core.hpp"

namespace crowdloc {

// splitmix64 with the standard constants; pinned so that generated
// fixtures are reproducible across platforms and implementations.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Box-Muller cosine branch; always consumes exactly two uniforms and
    // discards the sine partner so the stream layout stays trivial to
    // reproduce elsewhere.
    double next_gaussian();

  private:
    std::uint64_t state_;
};

enum class RecipeKind { Uniform, GaussianClusters, DensityGradient };

struct SceneRecipe {
    RecipeKind kind = RecipeKind::Uniform;
    int n_points = 0;
    double width = 128.0;
    double height = 128.0;
    int cluster_count = 3;   // GaussianClusters only
    double spread = 8.0;     // cluster standard deviation, px
    std::uint64_t seed = 0;
    std::string id = "scene";
};

// Exactly n_points ground-truth points inside [0,width) x [0,height),
// deterministic per seed. GaussianClusters draws cluster centers
// uniformly, then per point resamples (cluster, jitter) until the
// candidate lands in bounds. DensityGradient makes density grow
// linearly along x.
Scene generate(const SceneRecipe& recipe);

// Derives a prediction set from the ground truth: each point is dropped
// with probability drop_rate, otherwise jittered by an isotropic
// Gaussian of scale jitter_sigma and optionally duplicated with
// probability dup_rate. Confidence is exp(-(gx^2+gy^2)/2) over the
// jitter draw (1.0 when jitter_sigma == 0), so it decreases with the
// realized displacement.
Scene corrupt(const Scene& scene, double jitter_sigma, double drop_rate, double dup_rate,
              std::uint64_t seed);

}  // namespace crowdloc
