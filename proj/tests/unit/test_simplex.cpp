#include <doctest.h>

#include <cmath>
#include <random>

#include "rtrs/min_cost_flow.hpp"
#include "rtrs/simplex.hpp"

using namespace rtrs;

namespace {

// Optimality certificate for min c'x, Ax = b, l <= x <= u: primal feasible,
// and each reduced cost has the sign its active bound allows.
void check_certificate(const lp::Problem &p, const lp::Solution &s, double tol = 1e-6) {
    REQUIRE(s.status == lp::Status::Optimal);
    REQUIRE(s.x.size() == p.cost.size());
    REQUIRE(s.duals.size() == p.rows.size());
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        double lhs = 0;
        for (auto [j, a] : p.rows[r]) lhs += a * s.x[static_cast<std::size_t>(j)];
        CHECK(lhs == doctest::Approx(p.rhs[r]).epsilon(tol));
    }
    std::vector<double> d = p.cost;
    for (std::size_t r = 0; r < p.rows.size(); ++r)
        for (auto [j, a] : p.rows[r]) d[static_cast<std::size_t>(j)] -= a * s.duals[r];
    double obj = 0;
    for (std::size_t j = 0; j < p.cost.size(); ++j) {
        const double x = s.x[j];
        obj += p.cost[j] * x;
        CHECK(x >= p.lower[j] - tol);
        CHECK(x <= p.upper[j] + tol);
        const bool at_lower = std::abs(x - p.lower[j]) < tol;
        const bool at_upper = std::isfinite(p.upper[j]) && std::abs(x - p.upper[j]) < tol;
        if (!at_lower && !at_upper) CHECK(std::abs(d[j]) < tol);
        if (at_lower && !at_upper) CHECK(d[j] > -tol);
        if (at_upper && !at_lower) CHECK(d[j] < tol);
    }
    CHECK(obj == doctest::Approx(s.objective).epsilon(tol));
}

}  // namespace

TEST_CASE("textbook LP") {
    // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  -> 36 at (2, 6)
    lp::Problem p;
    const int x = p.add_variable(-3), y = p.add_variable(-5);
    const int s1 = p.add_variable(0), s2 = p.add_variable(0), s3 = p.add_variable(0);
    p.add_row({{x, 1}, {s1, 1}}, 4);
    p.add_row({{y, 2}, {s2, 1}}, 12);
    p.add_row({{x, 3}, {y, 2}, {s3, 1}}, 18);
    const auto s = lp::solve(p);
    CHECK(s.objective == doctest::Approx(-36));
    CHECK(s.x[0] == doctest::Approx(2));
    CHECK(s.x[1] == doctest::Approx(6));
    check_certificate(p, s);
}

TEST_CASE("bounds, infeasibility and unboundedness") {
    lp::Problem boxed;
    const int a = boxed.add_variable(-1, 0, 3), b = boxed.add_variable(-2, 1, 2);
    boxed.add_row({{a, 1}, {b, 1}}, 4);
    const auto s = lp::solve(boxed);
    CHECK(s.objective == doctest::Approx(-6));
    check_certificate(boxed, s);

    lp::Problem infeasible;
    const int u = infeasible.add_variable(1, 0, 1);
    infeasible.add_row({{u, 1}}, 2);
    CHECK(lp::solve(infeasible).status == lp::Status::Infeasible);

    lp::Problem unbounded;
    const int v = unbounded.add_variable(-1), w = unbounded.add_variable(0);
    unbounded.add_row({{v, 1}, {w, -1}}, 0);
    CHECK(lp::solve(unbounded).status == lp::Status::Unbounded);
}

TEST_CASE("random feasible LPs satisfy the optimality certificate") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coef(-3, 3), cost(-5, 5);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 6), m = 1 + static_cast<int>(rng() % 4);
        lp::Problem p;
        std::vector<double> x0(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const double hi = rng() % 3 == 0 ? lp::kInf : 1.0 + static_cast<double>(rng() % 4);
            p.add_variable(cost(rng), 0, hi);
            x0[static_cast<std::size_t>(j)] = std::isfinite(hi) ? hi / 2 : 1.0;
        }
        for (int r = 0; r < m; ++r) {
            std::vector<std::pair<int, double>> row;
            double b = 0;
            for (int j = 0; j < n; ++j) {
                const int c = coef(rng);
                if (c == 0) continue;
                row.emplace_back(j, c);
                b += c * x0[static_cast<std::size_t>(j)];
            }
            p.add_row(std::move(row), b);
        }
        const auto s = lp::solve(p);
        if (s.status == lp::Status::Unbounded) continue;
        check_certificate(p, s);
        ++solved;
    }
    CHECK(solved > 100);
}

TEST_CASE("branch and bound on a knapsack") {
    const std::vector<int> value{5, 4, 3, 7, 6}, weight{2, 3, 1, 4, 3};
    const int cap = 8;
    lp::Problem p;
    std::vector<std::pair<int, double>> row;
    for (std::size_t i = 0; i < value.size(); ++i) row.emplace_back(p.add_variable(-value[i], 0, 1), weight[i]);
    row.emplace_back(p.add_variable(0), 1);
    p.add_row(row, cap);
    std::vector<bool> integer(p.cost.size(), true);
    integer.back() = false;
    const auto s = lp::solve_mip(p, integer);

    int best = 0;
    for (int mask = 0; mask < 32; ++mask) {
        int v = 0, w = 0;
        for (int i = 0; i < 5; ++i)
            if (mask >> i & 1) v += value[static_cast<std::size_t>(i)], w += weight[static_cast<std::size_t>(i)];
        if (w <= cap) best = std::max(best, v);
    }
    CHECK(s.status == lp::MipStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-best));
    CHECK(s.root_bound <= s.objective + 1e-9);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(s.x[i] - std::round(s.x[i])) < 1e-6);
}

TEST_CASE("incumbent seeds the search and node limits report exhaustion") {
    lp::Problem p;
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < 12; ++i) row.emplace_back(p.add_variable(-(10 + i % 3), 0, 1), 2 + i % 4);
    row.emplace_back(p.add_variable(0), 1);
    p.add_row(row, 13);
    std::vector<bool> integer(p.cost.size(), true);
    std::vector<double> zero(p.cost.size(), 0.0);
    zero.back() = 13;
    lp::MipOptions tight;
    tight.node_limit = 1;
    const auto s = lp::solve_mip(p, integer, tight, &zero);
    CHECK(s.status != lp::MipStatus::Infeasible);
    CHECK(s.objective <= 0.0);
    const auto full = lp::solve_mip(p, integer, {}, &zero);
    CHECK(full.status == lp::MipStatus::Optimal);
    CHECK(full.objective <= s.objective + 1e-9);
}

TEST_CASE("min cost flow") {
    MinCostFlow f(4);
    const int e01 = f.add_edge(0, 1, 2, 1);
    const int e02 = f.add_edge(0, 2, 2, 4);
    f.add_edge(1, 3, 1, 1);
    f.add_edge(2, 3, 3, 1);
    f.add_edge(1, 2, 5, 1);
    const auto r = f.solve(0, 3, 10);
    CHECK(r.flow == 4);
    // paths: 0-1-3 (2), 0-1-2-3 (3), 0-2-3 twice (5)
    CHECK(r.cost == 15);
    CHECK(f.flow(e01) == 2);
    CHECK(f.flow(e02) == 2);

    MinCostFlow limited(2);
    limited.add_edge(0, 1, 5, 2);
    CHECK(limited.solve(0, 1, 3).flow == 3);
}
