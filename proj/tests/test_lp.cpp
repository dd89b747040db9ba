#include <random>

#include "doctest.h"

#include "qbound/bounds.hpp"
#include "qbound/lp.hpp"
#include "support.hpp"

using namespace qbound;
using doctest::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

LinearProgram random_lp(std::mt19937_64& rng, int n, int m) {
    // max c.x s.t. A x <= b with A, b, c > 0: feasible at 0 and bounded.
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<std::string> names;
    for (int j = 0; j < n; ++j) names.push_back("x" + std::to_string(j));
    LinearProgram lp(Sense::maximize, names);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = u(rng);
    lp.set_objective(c);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd row(n);
        for (int j = 0; j < n; ++j) row(j) = u(rng);
        lp.add_constraint("c" + std::to_string(i), row, Relation::less_equal, u(rng) * n);
    }
    return lp;
}

}  // namespace

TEST_CASE("triangle AGM program") {
    auto q = parse_spec("query Q(x,y,z) :- R1(x,y), R2(y,z), R3(z,x).").query;
    auto sol = solve(agm_program(q));
    REQUIRE(sol.optimal());
    CHECK(sol.objective == Approx(1.5).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) CHECK(sol.values(j) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("one-variable programs") {
    LinearProgram lp(Sense::maximize, {"x"});
    lp.set_objective(vec({1}));
    lp.add_constraint("cap", vec({1}), Relation::less_equal, 1);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == Approx(1.0));

    LinearProgram open(Sense::maximize, {"x"});
    open.set_objective(vec({1}));
    CHECK(solve(open).status == LpStatus::unbounded);

    LinearProgram nothing(Sense::minimize, {"x"});
    nothing.set_objective(vec({1}));
    auto zero = solve(nothing);
    REQUIRE(zero.optimal());
    CHECK(zero.objective == Approx(0.0));
}

TEST_CASE("infeasible program") {
    LinearProgram lp(Sense::maximize, {"x", "y"});
    lp.set_objective(vec({1, 1}));
    lp.add_constraint("sum", vec({1, 1}), Relation::less_equal, 1);
    lp.add_constraint("big", vec({1, 0}), Relation::greater_equal, 2);
    CHECK(solve(lp).status == LpStatus::infeasible);
}

TEST_CASE("equalities, bounds and negative right-hand sides") {
    LinearProgram lp(Sense::minimize, {"x", "y", "z"});
    lp.set_objective(vec({1, 2, -1}));
    lp.add_constraint("eq", vec({1, 1, 1}), Relation::equal, 4);
    lp.add_constraint("neg", vec({-1, 0, 1}), Relation::less_equal, -1);
    lp.set_bounds(0, 0.5, 3);
    lp.set_bounds(2, -2, 1.5);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    auto oracle = testing::vertex_optimum(lp);
    REQUIRE(oracle);
    CHECK(sol.objective == Approx(*oracle).epsilon(1e-9));
    CHECK(violated_constraints(lp, sol.values).empty());
}

TEST_CASE("Bland's rule terminates on a cycling example") {
    // Beale's example cycles under the largest-coefficient rule.
    LinearProgram lp(Sense::maximize, {"x4", "x5", "x6", "x7"});
    lp.set_objective(vec({0.75, -20, 0.5, -6}));
    lp.add_constraint("r1", vec({0.25, -8, -1, 9}), Relation::less_equal, 0);
    lp.add_constraint("r2", vec({0.5, -12, -0.5, 3}), Relation::less_equal, 0);
    lp.add_constraint("r3", vec({0, 0, 1, 0}), Relation::less_equal, 1);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == Approx(1.25).epsilon(1e-12));
    CHECK(sol.pivots < 100);
}

TEST_CASE("pivot limit reports failure") {
    std::mt19937_64 rng(3);
    auto lp = random_lp(rng, 5, 5);
    SimplexOptions opt;
    opt.pivot_limit = 0;
    auto sol = solve(lp, opt);
    CHECK(sol.status == LpStatus::failed);
    CHECK_FALSE(sol.message.empty());
}

TEST_CASE("solver matches vertex enumeration on random programs") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        const int n = std::uniform_int_distribution<int>(1, 4)(rng);
        const int m = std::uniform_int_distribution<int>(1, 5)(rng);
        auto lp = random_lp(rng, n, m);
        auto sol = solve(lp);
        REQUIRE(sol.optimal());
        auto oracle = testing::vertex_optimum(lp);
        REQUIRE(oracle);
        CHECK(sol.objective == Approx(*oracle).epsilon(1e-9));
        CHECK(violated_constraints(lp, sol.values).empty());
    }
}

TEST_CASE("scaling the objective scales the optimum") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        auto lp = random_lp(rng, 4, 4);
        const double base = solve(lp).objective;
        LinearProgram scaled = lp;
        scaled.set_objective(lp.objective() * 7.5);
        CHECK(solve(scaled).objective == Approx(7.5 * base).epsilon(1e-9));
    }
}

TEST_CASE("dualize") {
    LinearProgram lp(Sense::maximize, {"x"});
    lp.set_objective(vec({1}));
    lp.add_constraint("cap", vec({1}), Relation::less_equal, 1);
    auto d = dualize(lp);
    CHECK(d.sense() == Sense::minimize);
    CHECK(d.variable_names() == std::vector<std::string>{"y_cap"});
    REQUIRE(d.num_constraints() == 1);
    CHECK(d.constraints()[0].relation == Relation::greater_equal);
    CHECK(d.constraints()[0].rhs == 1.0);
    CHECK(solve(d).objective == Approx(1.0));

    LinearProgram eq(Sense::maximize, {"x"});
    eq.add_constraint("e", vec({1}), Relation::equal, 1);
    CHECK_THROWS_AS(dualize(eq), std::invalid_argument);
    LinearProgram bounded(Sense::maximize, {"x"});
    bounded.set_bounds(0, 0, 1);
    CHECK_THROWS_AS(dualize(bounded), std::invalid_argument);
}

TEST_CASE("dual of the triangle cover program is the independent-set program") {
    auto q = parse_spec("query Q(x,y,z) :- R1(x,y), R2(y,z), R3(z,x).").query;
    auto d = dualize(agm_program(q));
    auto packing = agm_dual_program(q);
    CHECK(d.sense() == Sense::maximize);
    REQUIRE(d.num_variables() == 3);
    REQUIRE(d.num_constraints() == 3);
    CHECK(d.objective() == packing.objective());
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(d.constraints()[i].relation == Relation::less_equal);
        CHECK(d.constraints()[i].coefficients == packing.constraints()[i].coefficients);
        CHECK(d.constraints()[i].rhs == packing.constraints()[i].rhs);
    }
    CHECK(solve(d).objective == Approx(1.5));
}

TEST_CASE("strong duality on random programs") {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 50; ++t) {
        auto lp = random_lp(rng, 5, 5);
        auto p = solve(lp), d = solve(dualize(lp));
        REQUIRE(p.optimal());
        REQUIRE(d.optimal());
        CHECK(std::abs(p.objective - d.objective) <= 1e-6);
        // Dualizing twice gives back the same optimum.
        CHECK(solve(dualize(dualize(lp))).objective == Approx(p.objective).epsilon(1e-9));
    }
}

TEST_CASE("violated_constraints reports rows and bounds") {
    LinearProgram lp(Sense::maximize, {"x", "y"});
    lp.add_constraint("sum", vec({1, 1}), Relation::less_equal, 1);
    lp.set_bounds(1, 0, 0.5);
    CHECK(violated_constraints(lp, vec({0.2, 0.2})).empty());
    CHECK(violated_constraints(lp, vec({1, 0.6})) == std::vector<std::size_t>{0, 2});
    CHECK(violated_constraints(lp, vec({-1, 0})) == std::vector<std::size_t>{1});
}

TEST_CASE("CPLEX LP export") {
    auto q = parse_spec("query Q(x,y,z) :- R1(x,y), R2(y,z), R3(z,x).").query;
    const std::string agm = export_lp_format(agm_program(q));
    CHECK(agm.find("Minimize") != std::string::npos);
    CHECK(agm.find("Subject To") != std::string::npos);
    CHECK(agm.rfind("End") != std::string::npos);
    std::size_t covers = 0;
    for (auto p = agm.find(">= 1"); p != std::string::npos; p = agm.find(">= 1", p + 1)) ++covers;
    CHECK(covers == 3);

    LinearProgram empty(Sense::maximize, {"x"});
    empty.set_objective(vec({1}));
    empty.set_bounds(0, 0, 2);
    const std::string e = export_lp_format(empty);
    CHECK(e.find("Maximize") != std::string::npos);
    const auto st = e.find("Subject To"), bd = e.find("Bounds");
    REQUIRE(st != std::string::npos);
    REQUIRE(bd != std::string::npos);
    CHECK(e.substr(st + 10, bd - st - 10).find_first_not_of(" \n") == std::string::npos);

    auto poly = polymatroid_program(q, {});
    CHECK(poly.num_variables() == 7);
    const std::string text = export_lp_format(poly);
    for (const auto& name : poly.variable_names()) CHECK(text.find(name) != std::string::npos);
}

TEST_CASE("export sanitizes and disambiguates names") {
    LinearProgram lp(Sense::maximize, {"a b", "a_b", "3x"});
    lp.set_objective(vec({1, 1, 1}));
    lp.add_constraint("r:1", vec({1, 1, 1}), Relation::less_equal, 1);
    const std::string text = export_lp_format(lp);
    CHECK(text.find("a b") == std::string::npos);
    CHECK(text.find("r:1") == std::string::npos);
}

TEST_CASE("constraint width is checked") {
    LinearProgram lp(Sense::maximize, {"x", "y"});
    CHECK_THROWS(lp.add_constraint("bad", vec({1}), Relation::less_equal, 1));
    CHECK_THROWS(lp.set_objective(vec({1, 2, 3})));
}
