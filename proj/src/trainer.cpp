#include "crowdloc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crowdloc/synth.hpp"

namespace crowdloc {

namespace {

constexpr double kLogClampLo = 1e-12;
constexpr double kLogClampHi = 1.0 - 1e-12;

double clamped_log(double x) { return std::log(std::clamp(x, kLogClampLo, kLogClampHi)); }

std::size_t pair_count(const TargetAssignment& targets) {
    std::size_t pairs = 0;
    for (std::size_t t : targets.proposal_target) {
        if (t != kNoTarget) ++pairs;
    }
    return pairs;
}

LossBreakdown loss_from_decoded(const Scene& scene, const std::vector<Prediction>& decoded,
                                const TargetAssignment& targets, const LossParams& params) {
    const std::size_t m = decoded.size();
    if (targets.proposal_target.size() != m) {
        throw std::invalid_argument("loss: assignment size disagrees with proposal count");
    }
    const std::size_t pairs = pair_count(targets);

    double cls = 0.0;
    double loc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t t = targets.proposal_target[j];
        if (t != kNoTarget) {
            cls += clamped_log(decoded[j].confidence);
            const double dx = scene.ground_truth[t].x - decoded[j].point.x;
            const double dy = scene.ground_truth[t].y - decoded[j].point.y;
            loc += dx * dx + dy * dy;
        } else {
            cls += params.lambda1 * clamped_log(1.0 - decoded[j].confidence);
        }
    }
    LossBreakdown lb;
    lb.l_cls = m == 0 ? 0.0 : -cls / static_cast<double>(m);
    lb.l_loc = pairs == 0 ? 0.0 : loc / static_cast<double>(pairs);
    lb.total = lb.l_cls + params.lambda2 * lb.l_loc;
    return lb;
}

Gradients gradients_from_decoded(const Scene& scene, const std::vector<Prediction>& decoded,
                                 const TargetAssignment& targets, const LossParams& params,
                                 double gamma) {
    const std::size_t m = decoded.size();
    if (targets.proposal_target.size() != m) {
        throw std::invalid_argument("loss_gradients: assignment size disagrees with proposal count");
    }
    const std::size_t pairs = pair_count(targets);

    Gradients g;
    g.offsets.assign(m, Offset{});
    g.logits.assign(m, ClassLogits{});
    const double inv_m = m == 0 ? 0.0 : 1.0 / static_cast<double>(m);
    const double loc_coeff =
        pairs == 0 ? 0.0 : params.lambda2 * 2.0 / static_cast<double>(pairs) * gamma;

    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t t = targets.proposal_target[j];
        const double c = decoded[j].confidence;
        if (t != kNoTarget) {
            g.offsets[j].dx = loc_coeff * (decoded[j].point.x - scene.ground_truth[t].x);
            g.offsets[j].dy = loc_coeff * (decoded[j].point.y - scene.ground_truth[t].y);
            if (c > kLogClampLo && c < kLogClampHi) {
                const double d_head = -inv_m * (1.0 - c);
                g.logits[j].head = d_head;
                g.logits[j].background = -d_head;
            }
        } else {
            if (1.0 - c > kLogClampLo && 1.0 - c < kLogClampHi) {
                const double d_head = params.lambda1 * inv_m * c;
                g.logits[j].head = d_head;
                g.logits[j].background = -d_head;
            }
        }
    }
    return g;
}

TargetAssignment assign_by_strategy(const Scene& scene, const std::vector<Prediction>& decoded,
                                    AssignStrategy strategy, const LossParams& params,
                                    double neg_threshold) {
    switch (strategy) {
        case AssignStrategy::OneToOne:
            return one_to_one_targets(
                one_to_one_assign(scene.ground_truth, decoded, MatchConfig{params.tau}),
                decoded.size());
        case AssignStrategy::NearestGt:
            return assign_nearest_gt(scene.ground_truth, decoded, neg_threshold);
        case AssignStrategy::NearestProposal:
            return assign_nearest_proposal(scene.ground_truth, decoded);
    }
    throw std::logic_error("assign_by_strategy: unknown strategy");
}

std::size_t thresholded_count(const std::vector<Prediction>& decoded) {
    std::size_t n = 0;
    for (const Prediction& p : decoded) {
        if (p.confidence > 0.5) ++n;
    }
    return n;
}

struct AdamState {
    std::vector<Offset> m_off, v_off;
    std::vector<ClassLogits> m_log, v_log;
    int t = 0;
};

void adam_update(ProposalModel& model, const Gradients& g, const TrainConfig& cfg,
                 AdamState& st, double lr) {
    ++st.t;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, st.t);
    const double corr2 = 1.0 - std::pow(b2, st.t);
    auto step = [&](double& theta, double grad, double& m, double& v) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        theta -= lr * (m / corr1) / (std::sqrt(v / corr2) + cfg.adam_epsilon);
    };
    for (std::size_t j = 0; j < model.offsets.size(); ++j) {
        step(model.offsets[j].dx, g.offsets[j].dx, st.m_off[j].dx, st.v_off[j].dx);
        step(model.offsets[j].dy, g.offsets[j].dy, st.m_off[j].dy, st.v_off[j].dy);
        step(model.logits[j].background, g.logits[j].background, st.m_log[j].background,
             st.v_log[j].background);
        step(model.logits[j].head, g.logits[j].head, st.m_log[j].head, st.v_log[j].head);
    }
}

void descend(ProposalModel& model, const Gradients& g, double lr) {
    for (std::size_t j = 0; j < model.offsets.size(); ++j) {
        model.offsets[j].dx -= lr * g.offsets[j].dx;
        model.offsets[j].dy -= lr * g.offsets[j].dy;
        model.logits[j].background -= lr * g.logits[j].background;
        model.logits[j].head -= lr * g.logits[j].head;
    }
}

}  // namespace

TargetAssignment one_to_one_targets(const MatchResult& match, std::size_t proposal_count) {
    TargetAssignment ta;
    ta.proposal_target.assign(proposal_count, kNoTarget);
    ta.gt_choice = match.assignment;
    for (std::size_t i = 0; i < match.assignment.size(); ++i) {
        ta.proposal_target[match.assignment[i]] = i;
    }
    ta.positive_count = match.assignment.size();
    return ta;
}

LossBreakdown loss_for_targets(const Scene& scene, const ProposalModel& model,
                               const TargetAssignment& targets, const LossParams& params,
                               const DecodeParams& decode_params) {
    return loss_from_decoded(scene, decode(model, decode_params), targets, params);
}

LossBreakdown loss(const Scene& scene, const ProposalModel& model, const MatchResult& match,
                   const LossParams& params, const DecodeParams& decode_params) {
    return loss_for_targets(scene, model,
                            one_to_one_targets(match, model.layout.points.size()), params,
                            decode_params);
}

Gradients gradients_for_targets(const Scene& scene, const ProposalModel& model,
                                const TargetAssignment& targets, const LossParams& params,
                                const DecodeParams& decode_params) {
    return gradients_from_decoded(scene, decode(model, decode_params), targets, params,
                                  decode_params.gamma);
}

Gradients loss_gradients(const Scene& scene, const ProposalModel& model,
                         const MatchResult& match, const LossParams& params,
                         const DecodeParams& decode_params) {
    return gradients_for_targets(scene, model,
                                 one_to_one_targets(match, model.layout.points.size()), params,
                                 decode_params);
}

FitResult fit_scene(const Scene& scene, const FeatureGridSpec& spec, const TrainConfig& cfg,
                    const LossParams& params, AssignStrategy strategy,
                    const FitOptions& options) {
    const std::size_t n = scene.ground_truth.size();
    const std::size_t m = spec.proposal_count();
    if (m <= n) {
        throw std::invalid_argument("fit_scene: need more proposals than ground truth (M > N)");
    }
    if (cfg.learning_rate <= 0.0 || cfg.steps < 1) {
        throw std::invalid_argument("fit_scene: learning_rate must be > 0 and steps >= 1");
    }
    const double neg_threshold =
        options.neg_threshold > 0.0 ? options.neg_threshold : spec.stride * 1.5;

    FitResult result;
    result.model = make_model(spec, options.layout);
    // Tiny seeded offset jitter breaks the symmetry of coincident
    // reference points (Center layout).
    SplitMix64 rng(cfg.seed);
    for (Offset& o : result.model.offsets) {
        o.dx = (rng.next_double() * 2.0 - 1.0) * 0.01;
        o.dy = (rng.next_double() * 2.0 - 1.0) * 0.01;
    }

    AdamState adam;
    if (cfg.optimizer == OptimizerKind::Adam) {
        adam.m_off.assign(m, Offset{});
        adam.v_off.assign(m, Offset{});
        adam.m_log.assign(m, ClassLogits{});
        adam.v_log.assign(m, ClassLogits{});
    }
    double lr = cfg.learning_rate;

    result.history.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 1; step <= cfg.steps; ++step) {
        const auto decoded = decode(result.model, options.decode);
        const auto targets = assign_by_strategy(scene, decoded, strategy, params, neg_threshold);
        const auto lb = loss_from_decoded(scene, decoded, targets, params);
        const auto grads =
            gradients_from_decoded(scene, decoded, targets, params, options.decode.gamma);
        result.history.push_back({step, lb, thresholded_count(decoded), targets.positive_count});

        if (cfg.optimizer == OptimizerKind::Adam) {
            adam_update(result.model, grads, cfg, adam, lr);
        } else {
            // Reject steps that raise the total (under re-matching) and
            // halve the rate; keeps the recorded loss non-increasing.
            ProposalModel before = result.model;
            bool accepted = false;
            for (int attempt = 0; attempt < 40; ++attempt) {
                descend(result.model, grads, lr);
                const auto trial = decode(result.model, options.decode);
                const auto trial_targets =
                    assign_by_strategy(scene, trial, strategy, params, neg_threshold);
                if (loss_from_decoded(scene, trial, trial_targets, params).total <= lb.total) {
                    accepted = true;
                    break;
                }
                result.model = before;
                lr *= 0.5;
            }
            if (!accepted) {
                result.model = before;  // stay put; gradient step cannot improve
            }
        }
    }
    return result;
}

}  // namespace crowdloc
