#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace rtrs::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min c^T x  s.t.  A x = b,  lower <= x <= upper.
/// Every lower bound must be finite; upper bounds may be kInf.
struct Problem {
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::vector<std::pair<int, double>>> rows;  // sparse (column, coefficient)
    std::vector<double> rhs;

    int add_variable(double c, double lo = 0.0, double hi = kInf) {
        cost.push_back(c);
        lower.push_back(lo);
        upper.push_back(hi);
        return static_cast<int>(cost.size()) - 1;
    }
    int add_row(std::vector<std::pair<int, double>> coeffs, double b) {
        rows.push_back(std::move(coeffs));
        rhs.push_back(b);
        return static_cast<int>(rows.size()) - 1;
    }
    int variable_count() const noexcept { return static_cast<int>(cost.size()); }
    int row_count() const noexcept { return static_cast<int>(rows.size()); }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> duals;  // one per row, sign convention: reduced cost = c - A^T duals
    long iterations = 0;
};

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    long iteration_limit = 1'000'000;
    int degenerate_switch = 50;  // consecutive degenerate pivots before Bland's rule
};

/// Dense bounded-variable primal simplex (two phases, artificial basis).
Solution solve(const Problem &problem, const Options &options = {});

struct MipOptions {
    long node_limit = 100'000;
    double integrality_tol = 1e-6;
    /// When every feasible objective value is an integer, nodes whose bound
    /// rounds up to the incumbent are pruned.
    bool integral_objective = false;
    Options lp;
};

enum class MipStatus { Optimal, Feasible, Infeasible };

struct MipSolution {
    MipStatus status = MipStatus::Infeasible;
    double objective = kInf;
    double root_bound = kInf;
    std::vector<double> x;
    long nodes = 0;
    bool budget_exhausted = false;
};

/// Depth-first branch and bound over the LP relaxation. `integer` flags the
/// integral variables. An optional starting incumbent seeds the search.
MipSolution solve_mip(const Problem &problem, const std::vector<bool> &integer, const MipOptions &options = {},
                      const std::vector<double> *incumbent = nullptr);

}  // namespace rtrs::lp
