#include "crowdloc/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdloc {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct DualSolution {
    std::vector<std::size_t> row_match;  // row -> column
    std::vector<double> u;               // row potentials
    std::vector<double> v;               // column potentials (0 on free columns)
};

// Shortest-augmenting-path assignment over a rectangular matrix with
// rows <= cols. Maintains feasible potentials (u[i] + v[j] <= c[i][j])
// with equality on matched edges; columns that never enter the matching
// keep v[j] == 0, which the tie-break refinement below relies on.
DualSolution solve_rectangular(const CostMatrix& c) {
    const std::size_t n = c.rows;
    const std::size_t m = c.cols;
    DualSolution ds;
    ds.u.assign(n, 0.0);
    ds.v.assign(m, 0.0);
    ds.row_match.assign(n, kNone);
    if (n == 0) return ds;

    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t vcol = m;  // virtual start column
    std::vector<double> minv(m);
    std::vector<std::size_t> way(m);
    std::vector<char> used(m + 1);
    std::vector<std::size_t> owner(m + 1, kNone);  // column -> row, incl. virtual

    for (std::size_t i = 0; i < n; ++i) {
        owner[vcol] = i;
        std::size_t j0 = vcol;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(way.begin(), way.end(), vcol);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = owner[j0];
            double delta = inf;
            std::size_t j1 = kNone;
            const double* row = &c.values[i0 * m];
            const double ui0 = ds.u[i0];
            for (std::size_t j = 0; j < m; ++j) {
                if (used[j]) continue;
                const double cur = row[j] - ui0 - ds.v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    ds.u[owner[j]] += delta;
                    if (j != vcol) ds.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != kNone);
        // Flip the alternating path recorded in `way`.
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != vcol);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (owner[j] != kNone) ds.row_match[owner[j]] = j;
    }
    return ds;
}

// Lexicographic tie-break among equal-cost optima.
//
// Every optimal assignment uses only tight edges (zero reduced cost
// under the final potentials) and must occupy every column whose
// potential is negative; conversely any tight assignment covering those
// columns is optimal. A fixed prefix therefore extends to an optimum
// iff (a) the remaining rows can be saturated on tight edges and (b)
// the remaining negative columns can be covered by remaining rows --
// two independent matching conditions (Mendelsohn-Dulmage). The
// refiner keeps one certificate matching per condition and repairs them
// incrementally with single augmenting paths per candidate column.
class LexicographicRefiner {
  public:
    LexicographicRefiner(const CostMatrix& c, const DualSolution& ds)
        : n_(c.rows), m_(c.cols) {
        double scale = 0.0;
        for (double x : c.values) scale = std::max(scale, std::abs(x));
        eps_ = 1e-9 * (1.0 + scale);

        adj_.resize(n_);
        col_adj_.resize(m_);
        col_negative_.assign(m_, 0);
        for (std::size_t j = 0; j < m_; ++j) col_negative_[j] = ds.v[j] < -eps_ ? 1 : 0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = &c.values[i * m_];
            for (std::size_t j = 0; j < m_; ++j) {
                if (std::abs(row[j] - ds.u[i] - ds.v[j]) <= eps_) {
                    adj_[i].push_back(j);
                    col_adj_[j].push_back(i);
                }
            }
        }

        col_open_.assign(m_, 1);
        mr_row_.assign(n_, kNone);
        mr_col_.assign(m_, kNone);
        mc_row_.assign(n_, kNone);
        mc_col_.assign(m_, kNone);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = ds.row_match[i];
            mr_row_[i] = j;
            mr_col_[j] = i;
            if (col_negative_[j]) {  // cover certificate holds negative columns only
                mc_row_[i] = j;
                mc_col_[j] = i;
            }
        }
        row_seen_.assign(n_, 0);
        col_seen_.assign(m_, 0);
    }

    std::vector<std::size_t> run() {
        std::vector<std::size_t> result(n_, kNone);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t chosen = kNone;
            for (std::size_t j : adj_[i]) {
                if (!col_open_[j]) continue;
                if (try_fix(i, j)) {
                    chosen = j;
                    break;
                }
            }
            if (chosen == kNone) {
                // Unreachable barring floating-point drift in the tightness
                // test; fall back to the solver's own (optimal) column.
                chosen = mr_row_[i] != kNone ? mr_row_[i] : first_open(i);
                detach(i, chosen);
            }
            result[i] = chosen;
            col_open_[chosen] = 0;
        }
        return result;
    }

  private:
    std::size_t first_open(std::size_t i) const {
        for (std::size_t j : adj_[i]) {
            if (col_open_[j]) return j;
        }
        for (std::size_t j = 0; j < m_; ++j) {
            if (col_open_[j]) return j;
        }
        return kNone;
    }

    // Augmenting path for the row-saturation certificate.
    bool augment_row(std::size_t r) {
        for (std::size_t j : adj_[r]) {
            if (!col_open_[j] || col_seen_[j]) continue;
            col_seen_[j] = 1;
            if (mr_col_[j] == kNone || augment_row(mr_col_[j])) {
                mr_col_[j] = r;
                mr_row_[r] = j;
                return true;
            }
        }
        return false;
    }

    // Augmenting path for the negative-column cover certificate; only
    // rows >= row_min are available.
    bool augment_col(std::size_t j, std::size_t row_min) {
        for (std::size_t r : col_adj_[j]) {
            if (r < row_min || row_seen_[r]) continue;
            row_seen_[r] = 1;
            if (mc_row_[r] == kNone || augment_col(mc_row_[r], row_min)) {
                mc_row_[r] = j;
                mc_col_[j] = r;
                return true;
            }
        }
        return false;
    }

    // Tests fixing row i -> column j; on success both certificates are
    // left updated for the remaining rows, on failure they are restored.
    bool try_fix(std::size_t i, std::size_t j) {
        const auto mr_row_save = mr_row_;
        const auto mr_col_save = mr_col_;
        const auto mc_row_save = mc_row_;
        const auto mc_col_save = mc_col_;

        bool ok = true;
        // Row certificate: retire row i, displace whoever held column j.
        const std::size_t own = mr_row_[i];
        if (own != kNone) {
            mr_col_[own] = kNone;
            mr_row_[i] = kNone;
        }
        const std::size_t displaced = mr_col_[j];
        if (displaced != kNone) {
            mr_col_[j] = kNone;
            mr_row_[displaced] = kNone;
            col_open_[j] = 0;
            std::fill(col_seen_.begin(), col_seen_.end(), 0);
            ok = augment_row(displaced);
            col_open_[j] = 1;
        }
        // Cover certificate: retire row i (re-covering its column if that
        // column still needs cover) and drop column j's requirement.
        if (ok) {
            const std::size_t held = mc_row_[i];
            if (held != kNone) {
                mc_col_[held] = kNone;
                mc_row_[i] = kNone;
            }
            if (mc_col_[j] != kNone) {
                mc_row_[mc_col_[j]] = kNone;
                mc_col_[j] = kNone;
            }
            if (held != kNone && held != j) {
                std::fill(row_seen_.begin(), row_seen_.end(), 0);
                ok = augment_col(held, i + 1);
            }
        }
        if (!ok) {
            mr_row_ = mr_row_save;
            mr_col_ = mr_col_save;
            mc_row_ = mc_row_save;
            mc_col_ = mc_col_save;
        }
        return ok;
    }

    // Used by the drift fallback: remove row i and column j from both
    // certificates without feasibility checks.
    void detach(std::size_t i, std::size_t j) {
        if (mr_row_[i] != kNone) mr_col_[mr_row_[i]] = kNone;
        mr_row_[i] = kNone;
        if (mr_col_[j] != kNone) mr_row_[mr_col_[j]] = kNone;
        mr_col_[j] = kNone;
        if (mc_row_[i] != kNone) mc_col_[mc_row_[i]] = kNone;
        mc_row_[i] = kNone;
        if (mc_col_[j] != kNone) mc_row_[mc_col_[j]] = kNone;
        mc_col_[j] = kNone;
    }

    std::size_t n_;
    std::size_t m_;
    double eps_ = 0.0;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::vector<std::size_t>> col_adj_;
    std::vector<char> col_negative_;
    std::vector<char> col_open_;
    std::vector<std::size_t> mr_row_, mr_col_;  // saturates remaining rows
    std::vector<std::size_t> mc_row_, mc_col_;  // covers open negative columns
    std::vector<char> row_seen_, col_seen_;
};

}  // namespace

CostMatrix build_cost_matrix(const std::vector<Point>& gt,
                             const std::vector<Prediction>& proposals,
                             const MatchConfig& cfg) {
    if (cfg.tau <= 0.0) {
        throw std::invalid_argument("build_cost_matrix: tau must be > 0");
    }
    if (proposals.empty()) {
        throw std::invalid_argument("build_cost_matrix: proposals must be non-empty");
    }
    if (gt.size() > proposals.size()) {
        throw std::invalid_argument("build_cost_matrix: insufficient proposals (need M >= N)");
    }
    CostMatrix c;
    c.rows = gt.size();
    c.cols = proposals.size();
    c.values.resize(c.rows * c.cols);
    for (std::size_t i = 0; i < c.rows; ++i) {
        for (std::size_t j = 0; j < c.cols; ++j) {
            const double d = euclidean_distance(gt[i], proposals[j].point);
            c.at(i, j) = cfg.tau * d - proposals[j].confidence;
        }
    }
    return c;
}

MatchResult hungarian_match(const CostMatrix& costs) {
    if (costs.rows > costs.cols) {
        throw std::invalid_argument("hungarian_match: insufficient proposals (need M >= N)");
    }
    if (costs.values.size() != costs.rows * costs.cols) {
        throw std::invalid_argument("hungarian_match: malformed cost matrix");
    }
    for (double x : costs.values) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("hungarian_match: cost entries must be finite");
        }
    }

    MatchResult result;
    result.assignment.assign(costs.rows, kUnmatched);

    // Normalize to non-negative entries; a uniform shift moves every
    // complete assignment total by the same amount, so the argmin and the
    // tie structure are unchanged. Conceptually the matrix is then padded
    // to square with zero-cost dummy rows absorbing unmatched columns;
    // the solver works on the rectangle directly, which is equivalent.
    CostMatrix shifted = costs;
    if (!shifted.values.empty()) {
        const double lo = *std::min_element(shifted.values.begin(), shifted.values.end());
        if (lo < 0.0) {
            for (double& x : shifted.values) x -= lo;
        }
    }

    const DualSolution ds = solve_rectangular(shifted);
    result.assignment = LexicographicRefiner(shifted, ds).run();

    double total = 0.0;
    std::vector<char> taken(costs.cols, 0);
    for (std::size_t i = 0; i < costs.rows; ++i) {
        total += costs.at(i, result.assignment[i]);
        taken[result.assignment[i]] = 1;
    }
    result.total_cost = total;
    for (std::size_t j = 0; j < costs.cols; ++j) {
        (taken[j] ? result.positives : result.negatives).push_back(j);
    }
    return result;
}

MatchResult one_to_one_assign(const std::vector<Point>& gt,
                              const std::vector<Prediction>& proposals,
                              const MatchConfig& cfg) {
    return hungarian_match(build_cost_matrix(gt, proposals, cfg));
}

}  // namespace crowdloc
