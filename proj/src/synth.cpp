#include "crowdloc/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crowdloc {

double SplitMix64::next_gaussian() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

bool in_bounds(double x, double y, const SceneRecipe& r) {
    return x >= 0.0 && x < r.width && y >= 0.0 && y < r.height;
}

}  // namespace

Scene generate(const SceneRecipe& recipe) {
    if (recipe.n_points < 0) {
        throw std::invalid_argument("generate: n_points must be >= 0");
    }
    if (recipe.width <= 0.0 || recipe.height <= 0.0) {
        throw std::invalid_argument("generate: image size must be positive");
    }
    if (recipe.kind == RecipeKind::GaussianClusters &&
        (recipe.cluster_count < 1 || recipe.spread <= 0.0)) {
        throw std::invalid_argument("generate: clusters need cluster_count >= 1 and spread > 0");
    }
    if (recipe.id.empty()) {
        throw std::invalid_argument("generate: scene id must be non-empty");
    }

    Scene scene;
    scene.id = recipe.id;
    scene.ground_truth.reserve(static_cast<std::size_t>(recipe.n_points));
    SplitMix64 rng(recipe.seed);

    switch (recipe.kind) {
        case RecipeKind::Uniform:
            for (int i = 0; i < recipe.n_points; ++i) {
                const double x = rng.next_double() * recipe.width;
                const double y = rng.next_double() * recipe.height;
                scene.ground_truth.push_back({x, y});
            }
            break;
        case RecipeKind::GaussianClusters: {
            std::vector<Point> centers;
            centers.reserve(static_cast<std::size_t>(recipe.cluster_count));
            for (int c = 0; c < recipe.cluster_count; ++c) {
                const double cx = rng.next_double() * recipe.width;
                const double cy = rng.next_double() * recipe.height;
                centers.push_back({cx, cy});
            }
            for (int i = 0; i < recipe.n_points; ++i) {
                double x = 0.0;
                double y = 0.0;
                do {
                    const std::size_t c =
                        static_cast<std::size_t>(rng.next() % static_cast<std::uint64_t>(
                                                                  recipe.cluster_count));
                    x = centers[c].x + recipe.spread * rng.next_gaussian();
                    y = centers[c].y + recipe.spread * rng.next_gaussian();
                } while (!in_bounds(x, y, recipe));
                scene.ground_truth.push_back({x, y});
            }
            break;
        }
        case RecipeKind::DensityGradient:
            for (int i = 0; i < recipe.n_points; ++i) {
                // Linear density along x: inverse CDF of p(x) ~ x.
                const double x = recipe.width * std::sqrt(rng.next_double());
                const double y = rng.next_double() * recipe.height;
                scene.ground_truth.push_back({x, y});
            }
            break;
    }
    return scene;
}

Scene corrupt(const Scene& scene, double jitter_sigma, double drop_rate, double dup_rate,
              std::uint64_t seed) {
    if (jitter_sigma < 0.0) {
        throw std::invalid_argument("corrupt: jitter_sigma must be >= 0");
    }
    if (drop_rate < 0.0 || drop_rate > 1.0 || dup_rate < 0.0 || dup_rate > 1.0) {
        throw std::invalid_argument("corrupt: rates must lie in [0, 1]");
    }

    Scene out = scene;
    out.predictions.emplace();
    out.predictions->reserve(scene.ground_truth.size());
    SplitMix64 rng(seed);

    auto jittered = [&](const Point& p) {
        const double gx = rng.next_gaussian();
        const double gy = rng.next_gaussian();
        const double confidence =
            jitter_sigma > 0.0 ? std::exp(-0.5 * (gx * gx + gy * gy)) : 1.0;
        return Prediction{{p.x + jitter_sigma * gx, p.y + jitter_sigma * gy}, confidence};
    };

    for (const Point& p : scene.ground_truth) {
        if (rng.next_double() < drop_rate) continue;  // false negative
        out.predictions->push_back(jittered(p));
        if (rng.next_double() < dup_rate) {
            out.predictions->push_back(jittered(p));  // false positive
        }
    }
    return out;
}

}  // namespace crowdloc
