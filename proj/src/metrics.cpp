#include "crowdloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdloc {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Prediction indices ordered by confidence descending, stable in the
// input order on ties.
std::vector<std::size_t> confidence_order(const std::vector<Prediction>& preds) {
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return preds[a].confidence > preds[b].confidence;
    });
    return order;
}

void validate_config(const NapConfig& cfg) {
    if (cfg.delta <= 0.0) throw std::invalid_argument("nap: delta must be > 0");
    if (cfg.k < 1) throw std::invalid_argument("nap: k must be >= 1");
    if (cfg.delta_sweep.empty()) throw std::invalid_argument("nap: empty delta sweep");
    for (std::size_t i = 0; i < cfg.delta_sweep.size(); ++i) {
        if (cfg.delta_sweep[i] <= 0.0) throw std::invalid_argument("nap: sweep deltas must be > 0");
        if (i > 0 && cfg.delta_sweep[i] < cfg.delta_sweep[i - 1]) {
            throw std::invalid_argument("nap: delta sweep must be ascending");
        }
    }
}

std::vector<RankedFlag> pooled_flags_with_contexts(const std::vector<Scene>& scenes,
                                                   const std::vector<DensityContext>& contexts,
                                                   double delta) {
    struct PooledFlag {
        double confidence;
        bool is_tp;
        const std::string* scene_id;
        std::size_t rank;  // position in the scene's ranked list
    };
    std::vector<PooledFlag> pooled;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const auto flags = sequential_associate(scenes[s], contexts[s], delta);
        for (std::size_t r = 0; r < flags.size(); ++r) {
            pooled.push_back({flags[r].confidence, flags[r].is_tp, &scenes[s].id, r});
        }
    }
    std::sort(pooled.begin(), pooled.end(), [](const PooledFlag& a, const PooledFlag& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (*a.scene_id != *b.scene_id) return *a.scene_id < *b.scene_id;
        return a.rank < b.rank;
    });
    std::vector<RankedFlag> ranked;
    ranked.reserve(pooled.size());
    for (const PooledFlag& f : pooled) ranked.push_back({f.confidence, f.is_tp});
    return ranked;
}

}  // namespace

std::vector<double> default_delta_sweep() {
    std::vector<double> sweep;
    sweep.reserve(10);
    for (int i = 1; i <= 10; ++i) sweep.push_back(0.05 * i);
    return sweep;
}

std::vector<RankedFlag> sequential_associate(const Scene& scene, const DensityContext& ctx,
                                             double delta) {
    if (!scene.has_predictions()) {
        throw std::invalid_argument("sequential_associate: scene has no predictions");
    }
    const auto& preds = *scene.predictions;
    const auto& gt = scene.ground_truth;

    std::vector<RankedFlag> flags;
    flags.reserve(preds.size());
    std::vector<char> consumed(gt.size(), 0);
    for (std::size_t idx : confidence_order(preds)) {
        const Prediction& p = preds[idx];
        std::size_t best = kNone;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (consumed[g]) continue;
            const double ratio = euclidean_distance(p.point, gt[g]) / ctx.d_knn[g];
            if (ratio < delta && ratio < best_ratio) {
                best_ratio = ratio;
                best = g;
            }
        }
        if (best != kNone) consumed[best] = 1;
        flags.push_back({p.confidence, best != kNone});
    }
    return flags;
}

std::vector<RankedFlag> greedy_associate(const Scene& scene, const DensityContext& ctx,
                                         double delta) {
    if (!scene.has_predictions()) {
        throw std::invalid_argument("greedy_associate: scene has no predictions");
    }
    const auto& preds = *scene.predictions;
    const auto& gt = scene.ground_truth;

    struct Pair {
        double ratio;
        std::size_t pred;
        std::size_t gt;
    };
    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < preds.size(); ++p) {
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const double ratio = euclidean_distance(preds[p].point, gt[g]) / ctx.d_knn[g];
            if (ratio < delta) pairs.push_back({ratio, p, g});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.ratio != b.ratio) return a.ratio < b.ratio;
        if (a.pred != b.pred) return a.pred < b.pred;
        return a.gt < b.gt;
    });

    std::vector<char> pred_used(preds.size(), 0);
    std::vector<char> gt_used(gt.size(), 0);
    std::vector<char> is_tp(preds.size(), 0);
    for (const Pair& pr : pairs) {
        if (pred_used[pr.pred] || gt_used[pr.gt]) continue;
        pred_used[pr.pred] = 1;
        gt_used[pr.gt] = 1;
        is_tp[pr.pred] = 1;
    }

    std::vector<RankedFlag> flags;
    flags.reserve(preds.size());
    for (std::size_t idx : confidence_order(preds)) {
        flags.push_back({preds[idx].confidence, is_tp[idx] != 0});
    }
    return flags;
}

PRCurve pr_curve(const std::vector<RankedFlag>& flags, std::size_t total_gt) {
    PRCurve curve;
    curve.ranked_flags = flags;
    curve.total_gt = total_gt;
    curve.points.reserve(flags.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < flags.size(); ++k) {
        if (flags[k].is_tp) ++tp;
        const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
        const double recall =
            total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
        curve.points.push_back({recall, precision});
    }
    return curve;
}

double average_precision(const std::vector<RankedFlag>& flags, std::size_t total_gt) {
    if (total_gt == 0) {
        return flags.empty() ? 1.0 : 0.0;
    }
    if (flags.empty()) return 0.0;

    const PRCurve curve = pr_curve(flags, total_gt);
    // Integrate the running-max precision envelope backward; recall only
    // advances on TP ranks, each contributing 1/total_gt of recall mass.
    // Summing envelopes first keeps the perfect-detector case exactly 1.
    double envelope = 0.0;
    double envelope_sum = 0.0;
    for (std::size_t k = flags.size(); k-- > 0;) {
        envelope = std::max(envelope, curve.points[k].precision);
        if (flags[k].is_tp) envelope_sum += envelope;
    }
    return envelope_sum / static_cast<double>(total_gt);
}

std::vector<RankedFlag> pooled_flags(const std::vector<Scene>& scenes, const NapConfig& cfg,
                                     double delta) {
    validate_config(cfg);
    if (delta <= 0.0) throw std::invalid_argument("pooled_flags: delta must be > 0");
    std::vector<DensityContext> contexts;
    contexts.reserve(scenes.size());
    for (const Scene& s : scenes) {
        contexts.push_back(knn_density(s.ground_truth, cfg.k, cfg.knn_fallback_radius));
    }
    return pooled_flags_with_contexts(scenes, contexts, delta);
}

NapReport nap_evaluate(const std::vector<Scene>& scenes, const NapConfig& cfg) {
    validate_config(cfg);
    for (const Scene& s : scenes) {
        if (!s.has_predictions()) {
            throw std::invalid_argument("nap_evaluate: scene '" + s.id + "' has no predictions");
        }
    }

    NapReport report;
    report.per_scene_counts.reserve(scenes.size());
    std::size_t total_gt = 0;
    for (const Scene& s : scenes) {
        total_gt += s.ground_truth.size();
        report.per_scene_counts.push_back({s.id, s.ground_truth.size(), count_scene(s)});
    }

    std::vector<DensityContext> contexts;
    contexts.reserve(scenes.size());
    for (const Scene& s : scenes) {
        contexts.push_back(knn_density(s.ground_truth, cfg.k, cfg.knn_fallback_radius));
    }

    double sum = 0.0;
    for (double delta : cfg.delta_sweep) {
        const double ap =
            average_precision(pooled_flags_with_contexts(scenes, contexts, delta), total_gt);
        report.ap_per_delta.emplace_back(delta, ap);
        sum += ap;
    }
    report.nap_mean = sum / static_cast<double>(cfg.delta_sweep.size());
    return report;
}

std::size_t count_scene(const Scene& scene, double threshold) {
    if (!scene.has_predictions()) {
        throw std::invalid_argument("count_scene: scene has no predictions");
    }
    std::size_t n = 0;
    for (const Prediction& p : *scene.predictions) {
        if (p.confidence > threshold) ++n;
    }
    return n;
}

CountErrors mae_mse(const std::vector<std::int64_t>& estimates,
                    const std::vector<std::int64_t>& truths) {
    if (estimates.empty() || estimates.size() != truths.size()) {
        throw std::invalid_argument("mae_mse: inputs must be non-empty and equal-sized");
    }
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double diff = static_cast<double>(estimates[i] - truths[i]);
        abs_sum += std::abs(diff);
        sq_sum += diff * diff;
    }
    const double n = static_cast<double>(estimates.size());
    return {abs_sum / n, std::sqrt(sq_sum / n)};
}

PrfSummary localization_prf(const std::vector<Scene>& scenes, const NapConfig& cfg,
                            double conf_threshold) {
    validate_config(cfg);
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t total_gt = 0;
    for (const Scene& s : scenes) {
        if (!s.has_predictions()) {
            throw std::invalid_argument("localization_prf: scene '" + s.id +
                                        "' has no predictions");
        }
        total_gt += s.ground_truth.size();
        Scene kept = s;
        kept.predictions.emplace();
        for (const Prediction& p : *s.predictions) {
            if (p.confidence > conf_threshold) kept.predictions->push_back(p);
        }
        const auto ctx = knn_density(s.ground_truth, cfg.k, cfg.knn_fallback_radius);
        for (const RankedFlag& f : sequential_associate(kept, ctx, cfg.delta)) {
            if (f.is_tp) {
                ++tp;
            } else {
                ++fp;
            }
        }
    }
    PrfSummary out;
    out.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    out.recall = total_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(total_gt);
    out.f1 = (out.precision + out.recall) == 0.0
                 ? 0.0
                 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
    return out;
}

}  // namespace crowdloc
