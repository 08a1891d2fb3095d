#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "crowdloc/core.hpp"

namespace crowdloc {

enum class LayoutKind { Center, Grid };

// Geometry of the proposal grid: H x W cells of stride s pixels, each
// carrying K reference points, for H*W*K proposals total.
struct FeatureGridSpec {
    int height = 0;
    int width = 0;
    int stride = 8;
    int points_per_cell = 4;

    std::size_t proposal_count() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(points_per_cell);
    }
};

struct ReferenceLayout {
    LayoutKind kind = LayoutKind::Grid;
    std::vector<Point> points;  // length H*W*K, row-major cells, k innermost
};

struct DecodeParams {
    double gamma = 100.0;  // offset scale, px per offset unit
};

struct Offset {
    double dx = 0.0;
    double dy = 0.0;
};

struct ClassLogits {
    double background = 0.0;
    double head = 0.0;
};

// Trainable state of the proposal set: per-proposal offsets and
// two-class logits over a fixed reference layout.
struct ProposalModel {
    FeatureGridSpec spec;
    ReferenceLayout layout;
    std::vector<Offset> offsets;
    std::vector<ClassLogits> logits;
};

// Center: all K points at the cell center. Grid: a centered
// sqrtK x sqrtK sub-grid (requires K to be a perfect square). Every
// point lies inside its own s x s patch.
ReferenceLayout make_layout(const FeatureGridSpec& spec, LayoutKind kind);

// Layout plus zero offsets and zero logits (confidence 0.5 everywhere).
ProposalModel make_model(const FeatureGridSpec& spec, LayoutKind kind);

double head_confidence(const ClassLogits& logits);  // softmax head probability

// Proposal j decodes to reference_j + gamma * offset_j with the softmax
// head probability as confidence; no clipping to image bounds.
std::vector<Prediction> decode(const ProposalModel& model, const DecodeParams& params);

inline constexpr std::size_t kNoTarget = std::numeric_limits<std::size_t>::max();

// Ground-truth target assignment produced by one of the three
// strategies; the trainer consumes this form directly.
struct TargetAssignment {
    std::vector<std::size_t> proposal_target;  // size M; GT index or kNoTarget
    std::vector<std::size_t> gt_choice;        // size N; proposal chosen per GT (when defined)
    std::size_t positive_count = 0;            // proposals holding a target
};

// Fig-3(a) baseline: every GT picks its nearest proposal; collisions
// allowed, so fewer than N proposals may end up positive. A colliding
// proposal regresses to its nearest claimant.
TargetAssignment assign_nearest_proposal(const std::vector<Point>& gt,
                                         const std::vector<Prediction>& proposals);

// Fig-3(b) baseline: every proposal picks its nearest GT and is
// negative beyond `neg_threshold` pixels; duplicates allowed, so more
// than N proposals may end up positive.
TargetAssignment assign_nearest_gt(const std::vector<Point>& gt,
                                   const std::vector<Prediction>& proposals,
                                   double neg_threshold);

}  // namespace crowdloc
