#include "rtrs/simplex.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rtrs::lp {

namespace {

enum class At : unsigned char { Lower, Upper, Basic };

// Dense tableau T = B^-1 [A_scaled | I] with columns 0..n-1 structural and
// n..n+m-1 artificial. Nonbasic variables rest at one of their bounds.
class Tableau {
public:
    Tableau(const Problem &p, const Options &opt) : opt_(opt), m_(p.row_count()), n_(p.variable_count()) {
        const int cols = n_ + m_;
        width_ = static_cast<std::size_t>(cols);
        t_.assign(static_cast<std::size_t>(m_) * width_, 0.0);
        lo_.assign(p.lower.begin(), p.lower.end());
        hi_.assign(p.upper.begin(), p.upper.end());
        lo_.resize(static_cast<std::size_t>(cols), 0.0);
        hi_.resize(static_cast<std::size_t>(cols), kInf);
        state_.assign(static_cast<std::size_t>(cols), At::Lower);
        basis_.resize(static_cast<std::size_t>(m_));
        beta_.resize(static_cast<std::size_t>(m_));
        sign_.resize(static_cast<std::size_t>(m_));

        for (int i = 0; i < m_; ++i) {
            double resid = p.rhs[static_cast<std::size_t>(i)];
            for (auto [j, a] : p.rows[static_cast<std::size_t>(i)]) resid -= a * lo_[static_cast<std::size_t>(j)];
            const double s = resid >= 0 ? 1.0 : -1.0;
            sign_[static_cast<std::size_t>(i)] = s;
            for (auto [j, a] : p.rows[static_cast<std::size_t>(i)]) cell(i, j) += s * a;
            cell(i, n_ + i) = 1.0;
            basis_[static_cast<std::size_t>(i)] = n_ + i;
            state_[static_cast<std::size_t>(n_ + i)] = At::Basic;
            beta_[static_cast<std::size_t>(i)] = s * resid;
        }
    }

    bool infeasible_bounds() const {
        for (int j = 0; j < n_; ++j)
            if (lo_[static_cast<std::size_t>(j)] > hi_[static_cast<std::size_t>(j)] + opt_.feasibility_tol) return true;
        return false;
    }

    // Runs primal simplex iterations from the current basis under `cost`.
    Status optimize(const std::vector<double> &cost, long &iterations) {
        cost_ = cost;
        price();
        int degenerate_streak = 0;
        while (true) {
            if (iterations >= opt_.iteration_limit) return Status::IterationLimit;
            const bool bland = degenerate_streak >= opt_.degenerate_switch;
            const int enter = choose_entering(bland);
            if (enter < 0) return Status::Optimal;
            const auto je = static_cast<std::size_t>(enter);
            const double dir = state_[je] == At::Lower ? 1.0 : -1.0;

            double theta = hi_[je] - lo_[je];  // bound flip
            int leave_row = -1;
            bool leave_to_upper = false;
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double alpha = cell(i, enter) * dir;
                if (std::abs(alpha) <= opt_.pivot_tol) continue;
                const auto bi = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
                double limit;
                bool to_upper;
                if (alpha > 0) {
                    limit = (beta_[static_cast<std::size_t>(i)] - lo_[bi]) / alpha;
                    to_upper = false;
                } else {
                    if (hi_[bi] == kInf) continue;
                    limit = (hi_[bi] - beta_[static_cast<std::size_t>(i)]) / -alpha;
                    to_upper = true;
                }
                limit = std::max(limit, 0.0);
                bool take;
                if (limit < theta - 1e-12) {
                    take = true;
                } else if (leave_row >= 0 && limit <= theta + 1e-12) {
                    take = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave_row)]
                                 : std::abs(alpha) > best_pivot;
                } else {
                    take = false;
                }
                if (take) {
                    theta = std::min(theta, limit);
                    leave_row = i;
                    leave_to_upper = to_upper;
                    best_pivot = std::abs(alpha);
                }
            }
            if (theta == kInf) return Status::Unbounded;
            ++iterations;
            degenerate_streak = theta <= opt_.feasibility_tol ? degenerate_streak + 1 : 0;

            for (int i = 0; i < m_; ++i) beta_[static_cast<std::size_t>(i)] -= cell(i, enter) * dir * theta;
            if (leave_row < 0) {
                state_[je] = state_[je] == At::Lower ? At::Upper : At::Lower;
                continue;
            }
            const auto lr = static_cast<std::size_t>(leave_row);
            const auto leaving = static_cast<std::size_t>(basis_[lr]);
            state_[leaving] = leave_to_upper ? At::Upper : At::Lower;
            const double entering_value = (dir > 0 ? lo_[je] : hi_[je]) + dir * theta;
            pivot(leave_row, enter);
            basis_[lr] = enter;
            state_[je] = At::Basic;
            beta_[lr] = entering_value;
        }
    }

    double sum_artificials() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i)
            if (basis_[static_cast<std::size_t>(i)] >= n_) s += beta_[static_cast<std::size_t>(i)];
        return s;
    }

    // Fixes artificials at zero and pivots out those still basic where possible.
    void retire_artificials() {
        for (int a = n_; a < n_ + m_; ++a) hi_[static_cast<std::size_t>(a)] = 0.0;
        for (int i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            int best = -1;
            double mag = opt_.pivot_tol * 1e3;
            for (int j = 0; j < n_; ++j)
                if (state_[static_cast<std::size_t>(j)] != At::Basic && std::abs(cell(i, j)) > mag) {
                    mag = std::abs(cell(i, j));
                    best = j;
                }
            if (best < 0) continue;
            const auto leaving = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
            const auto jb = static_cast<std::size_t>(best);
            const double value = state_[jb] == At::Upper ? hi_[jb] : lo_[jb];
            pivot(i, best);
            state_[leaving] = At::Lower;
            basis_[static_cast<std::size_t>(i)] = best;
            state_[jb] = At::Basic;
            beta_[static_cast<std::size_t>(i)] = value;
        }
    }

    std::vector<double> primal() const {
        std::vector<double> x(static_cast<std::size_t>(n_));
        for (int j = 0; j < n_; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            x[jj] = state_[jj] == At::Upper ? hi_[jj] : lo_[jj];
        }
        for (int i = 0; i < m_; ++i) {
            const int b = basis_[static_cast<std::size_t>(i)];
            if (b < n_) x[static_cast<std::size_t>(b)] = beta_[static_cast<std::size_t>(i)];
        }
        return x;
    }

    std::vector<double> duals() const {
        std::vector<double> y(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i)
            y[static_cast<std::size_t>(i)] = -sign_[static_cast<std::size_t>(i)] * reduced_[static_cast<std::size_t>(n_ + i)];
        return y;
    }

private:
    double &cell(int i, int j) { return t_[static_cast<std::size_t>(i) * width_ + static_cast<std::size_t>(j)]; }
    double cell(int i, int j) const { return t_[static_cast<std::size_t>(i) * width_ + static_cast<std::size_t>(j)]; }

    void price() {
        reduced_.assign(width_, 0.0);
        for (std::size_t j = 0; j < width_; ++j) reduced_[j] = cost_[j];
        for (int i = 0; i < m_; ++i) {
            const double cb = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            const double *row = &t_[static_cast<std::size_t>(i) * width_];
            for (std::size_t j = 0; j < width_; ++j) reduced_[j] -= cb * row[j];
        }
    }

    int choose_entering(bool bland) const {
        int best = -1;
        double best_score = opt_.optimality_tol;
        for (std::size_t j = 0; j < width_; ++j) {
            if (state_[j] == At::Basic || hi_[j] - lo_[j] <= 0.0) continue;
            const double d = reduced_[j];
            const double score = state_[j] == At::Lower ? -d : d;
            if (score <= opt_.optimality_tol) continue;
            if (bland) return static_cast<int>(j);
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(j);
            }
        }
        return best;
    }

    void pivot(int r, int c) {
        double *prow = &t_[static_cast<std::size_t>(r) * width_];
        const double pv = prow[c];
        for (std::size_t j = 0; j < width_; ++j) prow[j] /= pv;
        prow[c] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double *row = &t_[static_cast<std::size_t>(i) * width_];
            const double f = row[c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
            row[c] = 0.0;
        }
        const double f = reduced_[static_cast<std::size_t>(c)];
        if (f != 0.0) {
            for (std::size_t j = 0; j < width_; ++j) reduced_[j] -= f * prow[j];
            reduced_[static_cast<std::size_t>(c)] = 0.0;
        }
    }

    Options opt_;
    int m_;
    int n_;
    std::size_t width_ = 0;
    std::vector<double> t_;
    std::vector<double> lo_, hi_;
    std::vector<At> state_;
    std::vector<int> basis_;
    std::vector<double> beta_;
    std::vector<double> sign_;
    std::vector<double> cost_;
    std::vector<double> reduced_;
};

}  // namespace

Solution solve(const Problem &problem, const Options &options) {
    Solution out;
    const int n = problem.variable_count();
    const int m = problem.row_count();
    Tableau tab(problem, options);
    if (tab.infeasible_bounds()) return out;

    std::vector<double> phase1(static_cast<std::size_t>(n + m), 0.0);
    for (int i = 0; i < m; ++i) phase1[static_cast<std::size_t>(n + i)] = 1.0;
    auto st = tab.optimize(phase1, out.iterations);
    if (st == Status::IterationLimit) {
        out.status = st;
        return out;
    }
    double scale = 1.0;
    for (double b : problem.rhs) scale = std::max(scale, std::abs(b));
    if (tab.sum_artificials() > options.feasibility_tol * scale * 10) return out;  // Infeasible

    tab.retire_artificials();
    std::vector<double> phase2(problem.cost);
    phase2.resize(static_cast<std::size_t>(n + m), 0.0);
    st = tab.optimize(phase2, out.iterations);
    out.status = st;
    if (st != Status::Optimal) return out;
    out.x = tab.primal();
    out.duals = tab.duals();
    out.objective = 0.0;
    for (int j = 0; j < n; ++j) out.objective += problem.cost[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
    return out;
}

namespace {

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

class BranchAndBound {
public:
    BranchAndBound(const Problem &p, const std::vector<bool> &integer, const MipOptions &opt)
        : base_(p), integer_(integer), opt_(opt) {}

    MipSolution run(const std::vector<double> *incumbent) {
        if (incumbent && feasible(*incumbent)) {
            best_.x = *incumbent;
            best_.objective = objective(*incumbent);
            best_.status = MipStatus::Feasible;
        }
        Bounds root{base_.lower, base_.upper};
        explore(root, true);
        if (best_.status != MipStatus::Infeasible && !best_.budget_exhausted) best_.status = MipStatus::Optimal;
        return best_;
    }

private:
    double objective(const std::vector<double> &x) const {
        double v = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) v += base_.cost[j] * x[j];
        return v;
    }

    bool feasible(const std::vector<double> &x) const {
        if (x.size() != base_.cost.size()) return false;
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < base_.lower[j] - 1e-9 || x[j] > base_.upper[j] + 1e-9) return false;
            if (integer_[j] && std::abs(x[j] - std::round(x[j])) > opt_.integrality_tol) return false;
        }
        for (std::size_t i = 0; i < base_.rows.size(); ++i) {
            double lhs = 0.0;
            for (auto [j, a] : base_.rows[i]) lhs += a * x[static_cast<std::size_t>(j)];
            if (std::abs(lhs - base_.rhs[i]) > 1e-7 * (1.0 + std::abs(base_.rhs[i]))) return false;
        }
        return true;
    }

    bool pruned_by_bound(double bound) const {
        if (best_.status == MipStatus::Infeasible) return false;
        if (opt_.integral_objective) return std::ceil(bound - 1e-7) >= best_.objective - 1e-9;
        return bound >= best_.objective - 1e-9;
    }

    void explore(const Bounds &b, bool root) {
        if (best_.nodes >= opt_.node_limit) {
            best_.budget_exhausted = true;
            return;
        }
        ++best_.nodes;
        Problem p = base_;
        p.lower = b.lower;
        p.upper = b.upper;
        const auto sol = solve(p, opt_.lp);
        if (root && sol.status == Status::Optimal) best_.root_bound = sol.objective;
        if (sol.status != Status::Optimal) return;
        if (pruned_by_bound(sol.objective)) return;

        int branch = -1;
        double most = opt_.integrality_tol;
        for (std::size_t j = 0; j < sol.x.size(); ++j) {
            if (!integer_[j]) continue;
            const double frac = std::abs(sol.x[j] - std::round(sol.x[j]));
            if (frac > most + 1e-12) {
                most = frac;
                branch = static_cast<int>(j);
            }
        }
        if (branch < 0) {
            best_.x = sol.x;
            for (std::size_t j = 0; j < best_.x.size(); ++j)
                if (integer_[j]) best_.x[j] = std::round(best_.x[j]);
            best_.objective = objective(best_.x);
            best_.status = MipStatus::Feasible;
            return;
        }
        const auto jb = static_cast<std::size_t>(branch);
        const double v = sol.x[jb];
        Bounds up = b, down = b;
        up.lower[jb] = std::ceil(v);
        down.upper[jb] = std::floor(v);
        // Visit the nearer side first.
        if (v - std::floor(v) >= 0.5) {
            explore(up, false);
            explore(down, false);
        } else {
            explore(down, false);
            explore(up, false);
        }
    }

    const Problem &base_;
    const std::vector<bool> &integer_;
    MipOptions opt_;
    MipSolution best_;
};

}  // namespace

MipSolution solve_mip(const Problem &problem, const std::vector<bool> &integer, const MipOptions &options,
                      const std::vector<double> *incumbent) {
    BranchAndBound bb(problem, integer, options);
    return bb.run(incumbent);
}

}  // namespace rtrs::lp
