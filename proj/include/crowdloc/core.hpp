#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace crowdloc {

// A head-center location in image coordinates (pixels).
struct Point {
    double x = 0.0;
    double y = 0.0;
};

// A predicted head point with a confidence score in [0, 1].
struct Prediction {
    Point point;
    double confidence = 0.0;
};

// One image worth of annotations: the ground-truth point set and,
// optionally, a prediction set.
struct Scene {
    std::string id;
    std::vector<Point> ground_truth;
    std::optional<std::vector<Prediction>> predictions;

    bool has_predictions() const { return predictions.has_value(); }
};

// Per-ground-truth-point density scale: the average distance to the k
// nearest other ground-truth points.
struct DensityContext {
    int k = 3;
    std::vector<double> d_knn;  // one entry per ground-truth point, > 0
};

inline constexpr int kDefaultDensityK = 3;

// Density scale used when a scene has a single ground-truth point and
// no neighbor distance exists.
inline constexpr double kDefaultKnnFallbackRadius = 32.0;

double euclidean_distance(const Point& a, const Point& b);

// Average distance from each ground-truth point to its min(k, N-1)
// nearest neighbors. Empty input yields an empty context; a lone point
// (or coincident duplicates with no positive neighbor distance) falls
// back to `fallback_radius`.
DensityContext knn_density(const std::vector<Point>& ground_truth, int k,
                           double fallback_radius = kDefaultKnnFallbackRadius);

// Density-normalized hit test: true iff
//   d(pred, gt[gt_index]) / d_knn[gt_index] < delta   (strict).
bool match_criterion(const Point& pred, std::size_t gt_index,
                     const DensityContext& ctx, const std::vector<Point>& gt,
                     double delta);

}  // namespace crowdloc
