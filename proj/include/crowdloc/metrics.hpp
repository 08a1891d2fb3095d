#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crowdloc/core.hpp"

namespace crowdloc {

std::vector<double> default_delta_sweep();  // {0.05, 0.10, ..., 0.50}

struct NapConfig {
    double delta = 0.5;                 // threshold for single-delta operations
    int k = kDefaultDensityK;           // density neighbor count
    std::vector<double> delta_sweep = default_delta_sweep();
    double knn_fallback_radius = kDefaultKnnFallbackRadius;
};

struct RankedFlag {
    double confidence = 0.0;
    bool is_tp = false;
};

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<RankedFlag> ranked_flags;  // confidence-descending
    std::size_t total_gt = 0;
    std::vector<PRPoint> points;  // one per rank, recall non-decreasing
};

struct SceneCount {
    std::string scene_id;
    std::size_t ground_truth = 0;
    std::size_t counted = 0;
};

struct NapReport {
    std::vector<std::pair<double, double>> ap_per_delta;  // sweep order
    double nap_mean = 0.0;
    std::vector<SceneCount> per_scene_counts;
};

// TP/FP flags in descending confidence order (stable by input index).
// A prediction is TP iff some still-unmatched ground-truth point passes
// the density-normalized criterion; among several the nearest by
// normalized distance is consumed.
std::vector<RankedFlag> sequential_associate(const Scene& scene, const DensityContext& ctx,
                                             double delta);

// Baseline that pairs by globally ascending normalized distance
// regardless of confidence rank; flags are still reported in
// confidence order for comparability.
std::vector<RankedFlag> greedy_associate(const Scene& scene, const DensityContext& ctx,
                                         double delta);

// One confidence-ranked flag list pooled across all scenes at a single
// delta (ties broken by scene id, then input index).
std::vector<RankedFlag> pooled_flags(const std::vector<Scene>& scenes, const NapConfig& cfg,
                                     double delta);

PRCurve pr_curve(const std::vector<RankedFlag>& flags, std::size_t total_gt);

// Area under the monotone (precision-envelope) PR curve. With no
// ground truth anywhere the value is 0 if any prediction exists and 1
// if none (vacuous perfection).
double average_precision(const std::vector<RankedFlag>& flags, std::size_t total_gt);

// Pooled evaluation across scenes: per-delta AP over one ranked list
// (ties broken by scene id, then input index) plus the sweep mean and
// thresholded per-scene counts.
NapReport nap_evaluate(const std::vector<Scene>& scenes, const NapConfig& cfg);

// Predictions with confidence strictly greater than `threshold`.
std::size_t count_scene(const Scene& scene, double threshold = 0.5);

struct CountErrors {
    double mae = 0.0;
    double mse = 0.0;  // root of the mean squared error
};

CountErrors mae_mse(const std::vector<std::int64_t>& estimates,
                    const std::vector<std::int64_t>& truths);

struct PrfSummary {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Point-level precision/recall/F1: predictions above conf_threshold are
// sequentially associated per scene at cfg.delta.
PrfSummary localization_prf(const std::vector<Scene>& scenes, const NapConfig& cfg,
                            double conf_threshold);

}  // namespace crowdloc
