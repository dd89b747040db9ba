#include <cmath>
#include <random>

#include "doctest.h"

#include "qbound/bounds.hpp"
#include "qbound/instance.hpp"
#include "support.hpp"

using namespace qbound;
using doctest::Approx;

namespace {

const std::string kTriangle = "query Q(x,y,z) :- R1(x,y), R2(y,z), R3(z,x).";

Query triangle() { return parse_spec(kTriangle).query; }

std::vector<FunctionalDependency> xy_to_z() { return {{{"x", "y"}, {"z"}, std::nullopt}}; }

double optimum(const LinearProgram& lp) {
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    return sol.objective;
}

bool has_row(const std::vector<ConstraintViolation>& v, const std::string& name) {
    for (const auto& x : v)
        if (x.name == name) return true;
    return false;
}

}  // namespace

TEST_CASE("AGM program optima") {
    auto agm = agm_program(triangle());
    CHECK(agm.num_variables() == 3);
    CHECK(agm.num_constraints() == 3);
    CHECK(agm.sense() == Sense::minimize);
    CHECK(optimum(agm) == Approx(1.5).epsilon(1e-12));

    CHECK(optimum(agm_program(parse_spec("query Q(x) :- R(x).").query)) == Approx(1.0));

    auto cycle = parse_spec("query Q(x,y,z,w) :- R1(x,y), R2(y,z), R3(z,w), R4(w,x).").query;
    auto oracle = testing::vertex_optimum(agm_program(cycle));
    REQUIRE(oracle);
    CHECK(*oracle == Approx(2.0));
    CHECK(optimum(agm_program(cycle)) == Approx(*oracle).epsilon(1e-12));
}

TEST_CASE("repeated relations get one cover variable per atom") {
    auto dup = parse_spec("query Q(x,y) :- R(x,y), R(x,y).").query;
    auto lp = agm_program(dup);
    CHECK(lp.num_variables() == 2);
    CHECK(optimum(lp) == Approx(1.0));
}

TEST_CASE("agm_bound") {
    auto q = triangle();
    for (double n : {2.0, 10.0, 1000.0}) {
        const double b = agm_bound(q, {{"R1", n}, {"R2", n}, {"R3", n}});
        CHECK(std::abs(b - std::pow(n, 1.5)) <= 1e-9 * std::pow(n, 1.5));
    }
    CHECK(agm_bound(q, {{"R1", 1}, {"R2", 1}, {"R3", 1}}) == Approx(1.0));
    CHECK(agm_bound(q, {{"R1", 4}, {"R2", 4}, {"R3", 4}}) == Approx(8.0).epsilon(1e-12));
    CHECK_THROWS_AS(agm_bound(q, {{"R1", 4}}), std::invalid_argument);

    // Brute-force maximum join size over domain {0,1}: every triangle
    // database is a triple of subsets of {0,1}^2.
    std::size_t best = 0;
    for (unsigned mask = 0; mask < (1u << 12); ++mask) {
        DatabaseInstance db;
        for (int r = 0; r < 3; ++r) {
            RelationInstance rel{"R" + std::to_string(r + 1), {"a", "b"}, {}};
            for (int t = 0; t < 4; ++t)
                if (mask >> (4 * r + t) & 1) rel.tuples.push_back({t / 2, t % 2});
            db.add(rel);
        }
        best = std::max(best, testing::nested_loop_full(q, db).size());
    }
    CHECK(best == 8);
}

TEST_CASE("AGM dual program") {
    auto lp = agm_dual_program(triangle());
    CHECK(lp.sense() == Sense::maximize);
    auto sol = solve(lp);
    REQUIRE(sol.optimal());
    CHECK(sol.objective == Approx(1.5).epsilon(1e-12));
    for (int j = 0; j < 3; ++j) CHECK(sol.values(j) == Approx(0.5).epsilon(1e-12));
    CHECK(optimum(agm_dual_program(parse_spec("query Q(x) :- R(x).").query)) == Approx(1.0));
}

TEST_CASE("AGM primal and dual agree with vertex enumeration") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 40; ++t) {
        auto q = testing::random_query(rng);
        const double p = optimum(agm_program(q)), d = optimum(agm_dual_program(q));
        CHECK(std::abs(p - d) <= 1e-6);
        auto oracle = testing::vertex_optimum(agm_program(q));
        REQUIRE(oracle);
        CHECK(p == Approx(*oracle).epsilon(1e-9));
    }
}

TEST_CASE("polymatroid program on the triangle") {
    auto q = triangle();
    for (auto mode : {PolymatroidMode::paper_literal, PolymatroidMode::elemental}) {
        auto lp = polymatroid_program(q, {}, mode);
        CHECK(lp.num_variables() == 7);
        CHECK(optimum(lp) == Approx(1.5).epsilon(1e-12));
        auto fds = xy_to_z();
        CHECK(optimum(polymatroid_program(q, fds, mode)) == Approx(1.0).epsilon(1e-12));
    }
    auto single = parse_spec("query Q(x,y) :- R(x,y).").query;
    CHECK(optimum(polymatroid_program(single, {})) == Approx(1.0));
}

TEST_CASE("polymatroid row families") {
    auto lp = polymatroid_program(triangle(), {}, PolymatroidMode::paper_literal);
    std::size_t rel = 0, mono = 0, sub = 0;
    for (const auto& c : lp.constraints()) {
        if (c.name.rfind("rel_", 0) == 0) ++rel;
        if (c.name.rfind("mono_", 0) == 0) ++mono;
        if (c.name.rfind("sub", 0) == 0) ++sub;
    }
    CHECK(rel == 3);
    CHECK(mono == 3);
    // Pairs j<l times subsets of the remaining variable: 3 * 2.
    CHECK(sub == 6);
    CHECK(lp.find_variable(entropy_variable_name(triangle(), VarSet{7})).has_value());
}

TEST_CASE("renyi program") {
    auto q = triangle();
    CHECK(solve(renyi_program(q, {})).status == LpStatus::unbounded);
    auto fds = xy_to_z();
    CHECK(optimum(renyi_program(q, fds)) == Approx(1.0).epsilon(1e-12));
    auto covered = parse_spec("query Q(x,y) :- R(x,y), S(y,z).").query;
    CHECK(optimum(renyi_program(covered, {})) == Approx(1.0));
}

TEST_CASE("compute_bound") {
    auto q = triangle();
    auto fds = xy_to_z();
    BoundOptions opt;
    opt.rmax = 100;
    auto poly = compute_bound(BoundKind::polymatroid(), q, fds, opt);
    CHECK(poly.bounded());
    CHECK(poly.exponent == Approx(1.0));
    REQUIRE(poly.concrete);
    CHECK(*poly.concrete == Approx(100.0));
    CHECK(poly.witness.size() == 7);
    CHECK(poly.witness_names.size() == 7);

    opt.rmax = 7;
    auto agm = compute_bound(BoundKind::agm(), parse_spec("query Q(x) :- R(x).").query, {}, opt);
    CHECK(agm.exponent == Approx(1.0));
    CHECK(*agm.concrete == Approx(7.0));

    opt.rmax = 100;
    auto renyi = compute_bound(BoundKind::renyi(), q, {}, opt);
    CHECK(renyi.status == LpStatus::unbounded);
    CHECK(std::isinf(renyi.exponent));
    CHECK_FALSE(renyi.concrete);
}

TEST_CASE("per-relation caps") {
    auto q = triangle();
    BoundOptions opt;
    opt.rmax = 100;
    opt.per_relation_caps = true;
    opt.sizes = {{"R1", 100}, {"R2", 100}, {"R3", 10}};
    // Caps (1, 1, 1/2): the weighted cover min x1 + x2 + x3/2 is 5/4 at x = 1/2.
    auto poly = compute_bound(BoundKind::polymatroid(), q, {}, opt);
    CHECK(poly.exponent == Approx(1.25).epsilon(1e-9));
    CHECK(*poly.concrete == Approx(std::pow(100.0, 1.25)).epsilon(1e-9));
    BoundOptions missing = opt;
    missing.sizes.erase("R3");
    CHECK_THROWS_AS(compute_bound(BoundKind::polymatroid(), q, {}, missing), std::invalid_argument);
    auto caps = AtomCaps::from_sizes(q, opt.sizes, 100);
    CHECK(caps.caps == std::vector<double>{1.0, 1.0, 0.5});
}

TEST_CASE("entropy_vector_feasible") {
    auto q = triangle();
    auto lp = polymatroid_program(q, {}, PolymatroidMode::paper_literal);
    EntropyVector zero{Eigen::VectorXd::Zero(7), false};
    CHECK(entropy_vector_feasible(zero, lp).empty());

    EntropyVector bad{Eigen::VectorXd::Zero(7), false};
    bad[VarSet{0b011}] = 1;  // h(xy)
    bad[VarSet{0b001}] = 2;  // h(x)
    auto v = entropy_vector_feasible(bad, lp);
    CHECK(has_row(v, "mono_x"));

    EntropyVector wrong_size{Eigen::VectorXd::Zero(3), false};
    CHECK_THROWS(entropy_vector_feasible(wrong_size, lp));
}

TEST_CASE("Shannon entropies lie in the polymatroid cone") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        auto q = testing::random_query(rng, 4, 4);
        std::vector<FunctionalDependency> fds;
        if (auto fd = testing::random_fd(rng, q)) fds.push_back(*fd);
        auto dist = random_fd_distribution(q, fds, rng());
        auto h = classical_entropy_vector(dist);
        for (auto mode : {PolymatroidMode::paper_literal, PolymatroidMode::elemental}) {
            for (const auto& viol : entropy_vector_feasible(h, polymatroid_program(q, fds, mode)))
                CHECK_MESSAGE(viol.name.rfind("rel_", 0) == 0, viol.name);
        }
    }
}

TEST_CASE("the two monotonicity families differ as cones") {
    // h(xy)=1, h(xyz)=1/2: fine for h(V) >= h({j}) but not for h(V) >= h(V - {j}).
    auto q = triangle();
    EntropyVector h{Eigen::VectorXd::Zero(7), false};
    h[VarSet{0b011}] = 1;
    h[VarSet{0b111}] = 0.5;
    h[VarSet{0b001}] = h[VarSet{0b010}] = 0.5;
    h[VarSet{0b101}] = h[VarSet{0b110}] = 0.5;
    CHECK(entropy_vector_feasible(h, polymatroid_program(q, {}, PolymatroidMode::paper_literal)).empty());
    CHECK_FALSE(entropy_vector_feasible(h, polymatroid_program(q, {}, PolymatroidMode::elemental)).empty());
}

TEST_CASE("monotonicity modes agree on dependency-free full-head queries") {
    std::mt19937_64 rng(123);
    for (int t = 0; t < 40; ++t) {
        auto q = testing::random_query(rng, 5, 4);
        auto literal = compute_bound(BoundKind::polymatroid(PolymatroidMode::paper_literal), q, {});
        auto elemental = compute_bound(BoundKind::polymatroid(PolymatroidMode::elemental), q, {});
        CHECK(std::abs(literal.exponent - elemental.exponent) <= 1e-9);
    }
}

TEST_CASE("singleton monotonicity is looser on a projection head") {
    // Nothing in the literal family ties h(bc) to h(abc).
    auto q = parse_spec("query Q(b,c) :- R(a,b,c).").query;
    CHECK(compute_bound(BoundKind::polymatroid(PolymatroidMode::paper_literal), q, {}).exponent == Approx(2.0));
    CHECK(compute_bound(BoundKind::polymatroid(PolymatroidMode::elemental), q, {}).exponent == Approx(1.0));
}

TEST_CASE("bound program invariants on random queries") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 60; ++t) {
        auto q = testing::random_query(rng, 4, 4, t % 3 != 0);
        std::vector<FunctionalDependency> fds;
        if (auto fd = testing::random_fd(rng, q)) fds.push_back(*fd);

        auto elemental = compute_bound(BoundKind::polymatroid(), q, fds);
        auto literal = compute_bound(BoundKind::polymatroid(PolymatroidMode::paper_literal), q, fds);
        auto renyi = compute_bound(BoundKind::renyi(), q, fds);
        auto free_poly = compute_bound(BoundKind::polymatroid(), q, {});
        REQUIRE(elemental.bounded());
        REQUIRE(literal.bounded());
        CHECK(literal.exponent >= elemental.exponent - 1e-9);
        if (renyi.bounded()) CHECK(renyi.exponent >= elemental.exponent - 1e-9);
        // Adding dependencies never raises the bound.
        CHECK(elemental.exponent <= free_poly.exponent + 1e-9);
        // With a full head and no dependencies the polymatroid bound is AGM.
        if (q.head_set() == q.all()) {
            auto agm = compute_bound(BoundKind::agm(), q, {});
            CHECK(free_poly.exponent == Approx(agm.exponent).epsilon(1e-9));
        }
    }
}

TEST_CASE("program size limits") {
    auto big = parse_spec("query Q(a,b,c,d,e,f,g,h,i) :- R(a,b,c,d,e,f,g,h,i).").query;
    CHECK_THROWS_AS(polymatroid_program(big, {}), std::invalid_argument);
    CHECK(optimum(agm_program(big)) == Approx(1.0));
}
