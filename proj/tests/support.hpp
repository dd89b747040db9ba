#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.
// Nothing here calls the simplex solver or the hash join.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbound/instance.hpp"
#include "qbound/lp.hpp"
#include "qbound/quantum.hpp"
#include "qbound/query.hpp"

namespace testing {

// Optimum of a bounded, feasible LP by enumerating basic solutions: every
// choice of n tight inequalities (equalities always tight) is solved and the
// best feasible point kept.  Only for small programs.
inline std::optional<double> vertex_optimum(const qbound::LinearProgram& lp, double tol = 1e-9) {
    const auto n = static_cast<Eigen::Index>(lp.num_variables());
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    std::vector<bool> equality;
    std::vector<int> dir;  // +1: row.x <= rhs, -1: row.x >= rhs, 0: equality
    for (const auto& c : lp.constraints()) {
        rows.push_back(c.coefficients);
        rhs.push_back(c.rhs);
        dir.push_back(c.relation == qbound::Relation::less_equal ? 1 : c.relation == qbound::Relation::greater_equal ? -1 : 0);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1;
        if (std::isfinite(lp.lower_bounds()(j))) {
            rows.push_back(e);
            rhs.push_back(lp.lower_bounds()(j));
            dir.push_back(-1);
        }
        if (std::isfinite(lp.upper_bounds()(j))) {
            rows.push_back(e);
            rhs.push_back(lp.upper_bounds()(j));
            dir.push_back(1);
        }
    }
    std::vector<std::size_t> eqs, ineqs;
    for (std::size_t i = 0; i < rows.size(); ++i) (dir[i] == 0 ? eqs : ineqs).push_back(i);

    auto feasible = [&](const Eigen::VectorXd& x) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const double v = rows[i].dot(x);
            if (dir[i] == 0 && std::abs(v - rhs[i]) > 1e-7) return false;
            if (dir[i] == 1 && v > rhs[i] + 1e-7) return false;
            if (dir[i] == -1 && v < rhs[i] - 1e-7) return false;
        }
        return true;
    };

    const double sign = lp.sense() == qbound::Sense::maximize ? 1.0 : -1.0;
    std::optional<double> best;
    const std::size_t need = static_cast<std::size_t>(n) > eqs.size() ? static_cast<std::size_t>(n) - eqs.size() : 0;
    if (need > ineqs.size()) return std::nullopt;
    std::vector<bool> pick(ineqs.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(need), true);
    do {
        std::vector<std::size_t> active = eqs;
        for (std::size_t i = 0; i < ineqs.size(); ++i)
            if (pick[i]) active.push_back(ineqs[i]);
        Eigen::MatrixXd a(static_cast<Eigen::Index>(active.size()), n);
        Eigen::VectorXd b(static_cast<Eigen::Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) {
            a.row(static_cast<Eigen::Index>(i)) = rows[active[i]].transpose();
            b(static_cast<Eigen::Index>(i)) = rhs[active[i]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() < n) continue;
        const Eigen::VectorXd x = lu.solve(b);
        if ((a * x - b).norm() > 1e-8 || !feasible(x)) continue;
        const double obj = sign * lp.objective().dot(x);
        if (!best || obj > *best + tol) best = obj;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    if (best) *best *= sign;
    return best;
}

// Random query over variables a..d: up to `max_atoms` atoms with distinct
// relation names, each atom a nonempty duplicate-free argument list.
inline qbound::Query random_query(std::mt19937_64& rng, std::size_t max_atoms = 5, std::size_t max_vars = 4,
                                  bool full_head = true) {
    static const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f"};
    std::uniform_int_distribution<std::size_t> nvars_d(1, max_vars), natoms_d(1, max_atoms);
    const std::size_t nv = nvars_d(rng), na = natoms_d(rng);
    std::vector<qbound::Atom> body;
    std::set<std::string> used;
    for (std::size_t j = 0; j < na; ++j) {
        std::vector<std::string> args;
        while (args.empty()) {
            for (std::size_t v = 0; v < nv; ++v)
                if (std::bernoulli_distribution(0.5)(rng)) args.push_back(pool[v]);
        }
        std::shuffle(args.begin(), args.end(), rng);
        used.insert(args.begin(), args.end());
        body.push_back({"R" + std::to_string(j + 1), args});
    }
    std::vector<std::string> head(used.begin(), used.end());
    if (!full_head) {
        std::vector<std::string> h;
        for (const auto& v : head)
            if (std::bernoulli_distribution(0.6)(rng)) h.push_back(v);
        if (!h.empty()) head = h;
    }
    return qbound::Query("Q", head, body);
}

// Random nontrivial variable-level dependency among the query's variables.
inline std::optional<qbound::FunctionalDependency> random_fd(std::mt19937_64& rng, const qbound::Query& q) {
    const auto& vars = q.variables();
    if (vars.size() < 2) return std::nullopt;
    for (int attempt = 0; attempt < 20; ++attempt) {
        qbound::FunctionalDependency fd;
        for (const auto& v : vars) {
            const int r = std::uniform_int_distribution<int>(0, 2)(rng);
            if (r == 0) fd.lhs.push_back(v);
            else if (r == 1) fd.rhs.push_back(v);
        }
        if (fd.lhs.empty() || fd.rhs.empty()) continue;
        return qbound::normalize_fd(fd);
    }
    return std::nullopt;
}

// Nested-loop evaluation: enumerate every assignment of the query variables
// over the database's values and keep those satisfying all atoms.
inline std::set<qbound::Row> nested_loop_full(const qbound::Query& q, const qbound::DatabaseInstance& db) {
    std::set<qbound::Value> dom;
    for (const auto& [name, r] : db.relations())
        for (const auto& t : r.tuples) dom.insert(t.begin(), t.end());
    const std::vector<qbound::Value> values(dom.begin(), dom.end());
    const std::size_t n = q.num_variables();
    std::set<qbound::Row> out;
    if (values.empty()) return out;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        qbound::Row assign(n);
        for (std::size_t i = 0; i < n; ++i) assign[i] = values[idx[i]];
        bool ok = true;
        for (const auto& atom : q.body()) {
            qbound::Row t;
            for (const auto& v : atom.args) t.push_back(assign[*q.index_of(v)]);
            const auto* r = db.find(atom.relation);
            if (!std::binary_search(r->tuples.begin(), r->tuples.end(), t)) {
                ok = false;
                break;
            }
        }
        if (ok) out.insert(assign);
        std::size_t i = 0;
        while (i < n && ++idx[i] == values.size()) idx[i++] = 0;
        if (i == n) break;
    }
    return out;
}

// Random relations for every relation in the query, values in 0..domain-1.
inline qbound::DatabaseInstance random_database(std::mt19937_64& rng, const qbound::Query& q, std::size_t domain,
                                                double density) {
    qbound::DatabaseInstance db;
    for (const auto& [name, arity] : q.relation_arities()) {
        qbound::RelationInstance r{name, {}, {}};
        for (std::size_t i = 0; i < arity; ++i) r.attributes.push_back("c" + std::to_string(i));
        std::size_t total = 1;
        for (std::size_t i = 0; i < arity; ++i) total *= domain;
        for (std::size_t code = 0; code < total; ++code) {
            if (!std::bernoulli_distribution(density)(rng)) continue;
            qbound::Row t(arity);
            std::size_t c = code;
            for (std::size_t i = 0; i < arity; ++i, c /= domain) t[i] = static_cast<qbound::Value>(c % domain);
            r.tuples.push_back(t);
        }
        db.add(r);
    }
    return db;
}

// Probability vector with `support` nonzero entries among `dim`, weights
// drawn from U(0.05, 1).
inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t dim, std::size_t support) {
    std::vector<std::size_t> order(dim);
    for (std::size_t i = 0; i < dim; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> p(dim, 0.0);
    std::uniform_real_distribution<double> w(0.05, 1.0);
    double total = 0;
    for (std::size_t i = 0; i < support; ++i) total += p[order[i]] = w(rng);
    for (auto& x : p) x /= total;
    return p;
}

inline qbound::DensityMatrix classical_state(const qbound::SubsystemLayout& layout, const std::vector<double>& p) {
    std::map<std::uint64_t, double> diag;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0) diag[i] = p[i];
    return qbound::DensityMatrix::diagonal(layout, diag);
}

// G G^dagger / tr over a complex Gaussian G; generically full rank and
// non-diagonal.
inline qbound::DensityMatrix random_mixed_state(std::mt19937_64& rng, const qbound::SubsystemLayout& layout,
                                                std::size_t rank = 0) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    const Eigen::Index k = rank ? static_cast<Eigen::Index>(rank) : d;
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(d, k);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = {g(rng), g(rng)};
    Eigen::MatrixXcd rho = m * m.adjoint();
    rho /= rho.trace().real();
    rho = (rho + rho.adjoint()).eval() / 2.0;
    return qbound::DensityMatrix::dense(layout, rho);
}

// Shannon entropy in bits of a probability vector, summed in long double.
inline double shannon_bits(const std::vector<double>& p) {
    long double h = 0;
    for (double x : p)
        if (x > 0) h -= static_cast<long double>(x) * std::log2(static_cast<long double>(x));
    return static_cast<double>(h);
}

// Renyi entropy of a probability vector straight from the definition.
inline double renyi_bits(const std::vector<double>& p, double alpha) {
    if (alpha == 1.0) return shannon_bits(p);
    if (std::isinf(alpha)) return -std::log2(*std::max_element(p.begin(), p.end()));
    long double s = 0;
    for (double x : p)
        if (x > 0) s += std::pow(static_cast<long double>(x), static_cast<long double>(alpha));
    return static_cast<double>(std::log2(s) / (1.0L - alpha));
}

}  // namespace testing
