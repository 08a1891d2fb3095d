#include "crowdloc/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdloc {

double euclidean_distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

DensityContext knn_density(const std::vector<Point>& ground_truth, int k,
                           double fallback_radius) {
    if (k < 1) {
        throw std::invalid_argument("knn_density: k must be >= 1");
    }
    if (fallback_radius <= 0.0) {
        throw std::invalid_argument("knn_density: fallback radius must be > 0");
    }

    DensityContext ctx;
    ctx.k = k;
    const std::size_t n = ground_truth.size();
    ctx.d_knn.resize(n);
    if (n == 0) {
        return ctx;
    }

    std::vector<double> dists;
    dists.reserve(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.push_back(euclidean_distance(ground_truth[i], ground_truth[j]));
        }
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), dists.size());
        if (take == 0) {
            ctx.d_knn[i] = fallback_radius;
            continue;
        }
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(take),
                          dists.end());
        double sum = 0.0;
        for (std::size_t t = 0; t < take; ++t) sum += dists[t];
        const double mean = sum / static_cast<double>(take);
        // Coincident duplicates can drive the mean to zero; the criterion
        // divides by d_knn, so substitute the fallback scale instead.
        ctx.d_knn[i] = mean > 0.0 ? mean : fallback_radius;
    }
    return ctx;
}

bool match_criterion(const Point& pred, std::size_t gt_index,
                     const DensityContext& ctx, const std::vector<Point>& gt,
                     double delta) {
    if (delta <= 0.0) {
        throw std::invalid_argument("match_criterion: delta must be > 0");
    }
    if (gt_index >= gt.size() || gt_index >= ctx.d_knn.size()) {
        throw std::invalid_argument("match_criterion: gt_index out of range");
    }
    const double d = euclidean_distance(pred, gt[gt_index]);
    return d / ctx.d_knn[gt_index] < delta;
}

}  // namespace crowdloc
