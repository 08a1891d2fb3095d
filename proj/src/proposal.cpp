#include "crowdloc/proposal.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdloc {

namespace {

void validate_spec(const FeatureGridSpec& spec) {
    if (spec.height < 1 || spec.width < 1 || spec.points_per_cell < 1 || spec.stride < 1) {
        throw std::invalid_argument("make_layout: grid dimensions must be positive");
    }
}

int integer_sqrt(int k) {
    const int r = static_cast<int>(std::llround(std::sqrt(static_cast<double>(k))));
    return r * r == k ? r : -1;
}

}  // namespace

ReferenceLayout make_layout(const FeatureGridSpec& spec, LayoutKind kind) {
    validate_spec(spec);
    ReferenceLayout layout;
    layout.kind = kind;
    layout.points.reserve(spec.proposal_count());
    const double s = static_cast<double>(spec.stride);

    int side = 0;
    if (kind == LayoutKind::Grid) {
        side = integer_sqrt(spec.points_per_cell);
        if (side < 1) {
            throw std::invalid_argument("make_layout: Grid layout requires K to be a perfect square");
        }
    }

    for (int row = 0; row < spec.height; ++row) {
        for (int col = 0; col < spec.width; ++col) {
            if (kind == LayoutKind::Center) {
                const Point center{(col + 0.5) * s, (row + 0.5) * s};
                for (int k = 0; k < spec.points_per_cell; ++k) layout.points.push_back(center);
            } else {
                for (int b = 0; b < side; ++b) {
                    for (int a = 0; a < side; ++a) {
                        layout.points.push_back({(col + (a + 0.5) / side) * s,
                                                 (row + (b + 0.5) / side) * s});
                    }
                }
            }
        }
    }
    return layout;
}

ProposalModel make_model(const FeatureGridSpec& spec, LayoutKind kind) {
    ProposalModel model;
    model.spec = spec;
    model.layout = make_layout(spec, kind);
    model.offsets.assign(spec.proposal_count(), Offset{});
    model.logits.assign(spec.proposal_count(), ClassLogits{});
    return model;
}

double head_confidence(const ClassLogits& logits) {
    // softmax over (background, head), numerically stable
    return 1.0 / (1.0 + std::exp(logits.background - logits.head));
}

std::vector<Prediction> decode(const ProposalModel& model, const DecodeParams& params) {
    if (params.gamma <= 0.0) {
        throw std::invalid_argument("decode: gamma must be > 0");
    }
    const std::size_t m = model.layout.points.size();
    if (model.offsets.size() != m || model.logits.size() != m) {
        throw std::invalid_argument("decode: model arrays disagree with layout size");
    }
    std::vector<Prediction> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Point& ref = model.layout.points[j];
        out.push_back({{ref.x + params.gamma * model.offsets[j].dx,
                        ref.y + params.gamma * model.offsets[j].dy},
                       head_confidence(model.logits[j])});
    }
    return out;
}

TargetAssignment assign_nearest_proposal(const std::vector<Point>& gt,
                                         const std::vector<Prediction>& proposals) {
    if (proposals.empty()) {
        throw std::invalid_argument("assign_nearest_proposal: proposals must be non-empty");
    }
    TargetAssignment ta;
    ta.proposal_target.assign(proposals.size(), kNoTarget);
    ta.gt_choice.assign(gt.size(), kNoTarget);

    for (std::size_t g = 0; g < gt.size(); ++g) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < proposals.size(); ++j) {
            const double d = euclidean_distance(gt[g], proposals[j].point);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        ta.gt_choice[g] = best;
        // On collision the proposal keeps the nearer claimant.
        const std::size_t held = ta.proposal_target[best];
        if (held == kNoTarget ||
            euclidean_distance(gt[g], proposals[best].point) <
                euclidean_distance(gt[held], proposals[best].point)) {
            ta.proposal_target[best] = g;
        }
    }
    for (std::size_t j = 0; j < proposals.size(); ++j) {
        if (ta.proposal_target[j] != kNoTarget) ++ta.positive_count;
    }
    return ta;
}

TargetAssignment assign_nearest_gt(const std::vector<Point>& gt,
                                   const std::vector<Prediction>& proposals,
                                   double neg_threshold) {
    if (proposals.empty()) {
        throw std::invalid_argument("assign_nearest_gt: proposals must be non-empty");
    }
    if (neg_threshold <= 0.0) {
        throw std::invalid_argument("assign_nearest_gt: neg_threshold must be > 0");
    }
    TargetAssignment ta;
    ta.proposal_target.assign(proposals.size(), kNoTarget);
    ta.gt_choice.assign(gt.size(), kNoTarget);

    for (std::size_t j = 0; j < proposals.size(); ++j) {
        std::size_t best = kNoTarget;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const double d = euclidean_distance(gt[g], proposals[j].point);
            if (d < best_d) {
                best_d = d;
                best = g;
            }
        }
        if (best != kNoTarget && best_d <= neg_threshold) {
            ta.proposal_target[j] = best;
            ++ta.positive_count;
        }
    }
    return ta;
}

}  // namespace crowdloc
