#pragma once

#include <cstdint>
#include <vector>

#include "crowdloc/assignment.hpp"
#include "crowdloc/proposal.hpp"

namespace crowdloc {

struct LossParams {
    double lambda1 = 0.5;   // reweight on the negative classification term
    double lambda2 = 2e-4;  // weight on the regression loss
    double tau = 5e-2;      // matching weight, forwarded to one-to-one costs
};

struct LossBreakdown {
    double l_cls = 0.0;
    double l_loc = 0.0;
    double total = 0.0;  // l_cls + lambda2 * l_loc
};

enum class OptimizerKind { GradientDescent, Adam };

struct TrainConfig {
    double learning_rate = 1e-2;
    int steps = 1;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
};

enum class AssignStrategy { OneToOne, NearestGt, NearestProposal };

// Adapts a one-to-one match (gt i -> proposal xi(i)) to the per-proposal
// target form shared with the baseline strategies.
TargetAssignment one_to_one_targets(const MatchResult& match, std::size_t proposal_count);

// Classification loss averaged over all M proposals (positives push
// log-confidence up, negatives push log(1-confidence) weighted by
// lambda1), plus the mean squared pixel distance over matched pairs.
// Log arguments are clamped to [1e-12, 1 - 1e-12].
LossBreakdown loss_for_targets(const Scene& scene, const ProposalModel& model,
                               const TargetAssignment& targets, const LossParams& params,
                               const DecodeParams& decode_params = {});

LossBreakdown loss(const Scene& scene, const ProposalModel& model, const MatchResult& match,
                   const LossParams& params, const DecodeParams& decode_params = {});

struct Gradients {
    std::vector<Offset> offsets;
    std::vector<ClassLogits> logits;
};

// Analytic gradients of the loss above; the assignment is held constant
// through the backward pass. Matched offsets receive
// lambda2 * (2 / pairs) * gamma * (decoded - target); negatives get
// exactly zero. Logit gradients use the softmax cross-entropy closed
// form with the (1/M, lambda1) weights.
Gradients gradients_for_targets(const Scene& scene, const ProposalModel& model,
                                const TargetAssignment& targets, const LossParams& params,
                                const DecodeParams& decode_params = {});

Gradients loss_gradients(const Scene& scene, const ProposalModel& model,
                         const MatchResult& match, const LossParams& params,
                         const DecodeParams& decode_params = {});

struct TrainStep {
    int step = 0;  // 1-based
    LossBreakdown loss;
    std::size_t thresholded_count = 0;  // predictions with confidence > 0.5
    std::size_t positive_count = 0;     // proposals holding a target this step
};

struct FitResult {
    ProposalModel model;
    std::vector<TrainStep> history;
};

struct FitOptions {
    LayoutKind layout = LayoutKind::Grid;
    DecodeParams decode;
    double neg_threshold = -1.0;  // NearestGt radius; <= 0 picks stride * 1.5
};

// Deterministic per-scene optimization: decode -> assign by strategy ->
// loss -> gradients -> update, for cfg.steps steps. GradientDescent
// rejects steps that increase the total loss and halves the rate
// instead, so its loss history is non-increasing; Adam runs the
// standard moment updates.
FitResult fit_scene(const Scene& scene, const FeatureGridSpec& spec, const TrainConfig& cfg,
                    const LossParams& params, AssignStrategy strategy,
                    const FitOptions& options = {});

}  // namespace crowdloc
