#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "crowdloc/core.hpp"

namespace crowdloc {

// Pairwise matching cost between ground-truth points (rows) and
// proposals (columns): tau * pixel distance - confidence. Entries can
// be negative. The matcher requires rows <= cols.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major, rows * cols entries

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct MatchConfig {
    double tau = 5e-2;  // weight on the pixel-distance term
};

inline constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

// Result of a one-to-one assignment. `assignment[i]` is the proposal
// column matched to ground-truth row i; the map is injective.
struct MatchResult {
    std::vector<std::size_t> assignment;  // size rows
    std::vector<std::size_t> positives;   // matched proposal indices, ascending
    std::vector<std::size_t> negatives;   // unmatched proposal indices, ascending
    double total_cost = 0.0;
};

CostMatrix build_cost_matrix(const std::vector<Point>& gt,
                             const std::vector<Prediction>& proposals,
                             const MatchConfig& cfg);

// Minimum-cost injective assignment of every row to a distinct column
// (Kuhn-Munkres with row/column potentials). Ties between equal-cost
// optima are broken toward the lexicographically smallest assignment
// vector; exact for integer-valued matrices.
MatchResult hungarian_match(const CostMatrix& costs);

// build_cost_matrix followed by hungarian_match; unmatched proposals
// are reported as negatives.
MatchResult one_to_one_assign(const std::vector<Point>& gt,
                              const std::vector<Prediction>& proposals,
                              const MatchConfig& cfg);

}  // namespace crowdloc
