#include "qbound/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace qbound {

namespace {

constexpr std::size_t kMaxEntropyVariables = 8;

std::vector<std::string> atom_variable_names(const Query& q) {
    std::map<std::string, int> count;
    for (const auto& a : q.body()) ++count[a.relation];
    std::vector<std::string> out;
    for (std::size_t j = 0; j < q.body().size(); ++j) {
        const auto& rel = q.body()[j].relation;
        out.push_back(count[rel] == 1 ? "x_" + rel : "x_" + rel + "_" + std::to_string(j + 1));
    }
    return out;
}

std::vector<std::string> entropy_variable_names(const Query& q) {
    SubsetIndex idx(q.num_variables());
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= idx.count(); ++i) out.push_back(entropy_variable_name(q, idx.subset(i)));
    return out;
}

// Linear form over h(S) columns; h(empty) is the constant 0 and is dropped.
class EntropyRow {
public:
    explicit EntropyRow(std::size_t n) : row_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(SubsetIndex(n).count()))) {}

    EntropyRow& add(VarSet s, double c) {
        if (!s.empty()) row_(static_cast<Eigen::Index>(s.bits) - 1) += c;
        return *this;
    }
    Eigen::VectorXd take() { return std::move(row_); }

private:
    Eigen::VectorXd row_;
};

void add_query_constraints(LinearProgram& lp, const Query& q, std::span<const FunctionalDependency> fds,
                           const AtomCaps& caps) {
    const std::size_t n = q.num_variables();
    if (!caps.caps.empty() && caps.caps.size() != q.body().size())
        throw std::invalid_argument("atom caps must have one entry per body atom");
    for (std::size_t j = 0; j < q.body().size(); ++j) {
        const double cap = caps.caps.empty() ? 1.0 : caps.caps[j];
        lp.add_constraint("rel_" + std::to_string(j + 1) + "_" + q.body()[j].relation,
                          EntropyRow(n).add(q.atom_set(j), 1.0).take(), Relation::less_equal, cap);
    }
    for (std::size_t k = 0; k < fds.size(); ++k) {
        const VarSet a = q.mask_of(fds[k].lhs);
        const VarSet ab = a | q.mask_of(fds[k].rhs);
        if (ab == a) continue;
        lp.add_constraint("fd_" + std::to_string(k + 1), EntropyRow(n).add(ab, 1.0).add(a, -1.0).take(),
                          Relation::equal, 0.0);
    }
}

LinearProgram entropy_program(const Query& q) {
    if (q.num_variables() > kMaxEntropyVariables)
        throw std::invalid_argument("entropy programs are limited to " + std::to_string(kMaxEntropyVariables) +
                                    " variables");
    LinearProgram lp(Sense::maximize, entropy_variable_names(q));
    lp.set_objective(EntropyRow(q.num_variables()).add(q.head_set(), 1.0).take());
    return lp;
}

}  // namespace

std::string to_string(BoundKind k) {
    switch (k.kind()) {
        case BoundKind::Kind::agm: return "agm";
        case BoundKind::Kind::agm_dual: return "agm-dual";
        case BoundKind::Kind::polymatroid: return "polymatroid";
        case BoundKind::Kind::renyi: return "renyi";
    }
    return "?";
}

const char* to_string(PolymatroidMode m) { return m == PolymatroidMode::paper_literal ? "literal" : "elemental"; }

AtomCaps AtomCaps::from_sizes(const Query& q, const std::map<std::string, double>& sizes, double rmax) {
    if (rmax < 2) throw std::invalid_argument("per-relation caps need rmax >= 2");
    AtomCaps out;
    for (const auto& atom : q.body()) {
        auto it = sizes.find(atom.relation);
        if (it == sizes.end()) throw std::invalid_argument("missing size for relation " + atom.relation);
        out.caps.push_back(std::log2(it->second) / std::log2(rmax));
    }
    return out;
}

std::string entropy_variable_name(const Query& q, VarSet s) {
    std::string out = "h";
    for (const auto& v : q.names_of(s)) out += "_" + v;
    return out;
}

LinearProgram agm_program(const Query& q) {
    LinearProgram lp(Sense::minimize, atom_variable_names(q));
    const auto m = static_cast<Eigen::Index>(q.body().size());
    lp.set_objective(Eigen::VectorXd::Ones(m));
    for (std::size_t v = 0; v < q.num_variables(); ++v) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(m);
        for (Eigen::Index j = 0; j < m; ++j)
            if (q.atom_set(static_cast<std::size_t>(j)).contains(v)) row(j) = 1.0;
        lp.add_constraint("cover_" + q.variables()[v], std::move(row), Relation::greater_equal, 1.0);
    }
    return lp;
}

LinearProgram agm_dual_program(const Query& q) {
    std::vector<std::string> names;
    for (const auto& v : q.variables()) names.push_back("y_" + v);
    LinearProgram lp(Sense::maximize, names);
    const auto n = static_cast<Eigen::Index>(q.num_variables());
    lp.set_objective(Eigen::VectorXd::Ones(n));
    const auto atoms = atom_variable_names(q);
    for (std::size_t j = 0; j < q.body().size(); ++j) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
        const VarSet e = q.atom_set(j);
        for (Eigen::Index v = 0; v < n; ++v)
            if (e.contains(static_cast<std::size_t>(v))) row(v) = 1.0;
        lp.add_constraint("pack_" + atoms[j].substr(2), std::move(row), Relation::less_equal, 1.0);
    }
    return lp;
}

LinearProgram polymatroid_program(const Query& q, std::span<const FunctionalDependency> fds, PolymatroidMode mode,
                                  const AtomCaps& caps) {
    LinearProgram lp = entropy_program(q);
    add_query_constraints(lp, q, fds, caps);

    const std::size_t n = q.num_variables();
    const VarSet all = q.all();
    for (std::size_t j = 0; j < n && n > 1; ++j) {
        const VarSet smaller = mode == PolymatroidMode::paper_literal ? VarSet::single(j) : all.without(VarSet::single(j));
        lp.add_constraint("mono_" + q.variables()[j], EntropyRow(n).add(all, 1.0).add(smaller, -1.0).take(),
                          Relation::greater_equal, 0.0);
    }
    // h(S+j) + h(S+l) >= h(S+j+l) + h(S) for j < l and S avoiding both.
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = j + 1; l < n; ++l) {
            const VarSet jl = VarSet::single(j) | VarSet::single(l);
            const VarSet rest = all.without(jl);
            // Enumerate subsets of `rest`, including the empty one.
            std::uint32_t s = 0;
            do {
                const VarSet S{s};
                EntropyRow row(n);
                row.add(S | VarSet::single(j), 1.0).add(S | VarSet::single(l), 1.0).add(S | jl, -1.0).add(S, -1.0);
                std::string name = (S.empty() ? "subadd_" : "submod_") + q.variables()[j] + "_" + q.variables()[l];
                for (const auto& v : q.names_of(S)) name += "_" + v;
                lp.add_constraint(std::move(name), row.take(), Relation::greater_equal, 0.0);
                s = (s - rest.bits) & rest.bits;
            } while (s != 0);
        }
    }
    return lp;
}

LinearProgram renyi_program(const Query& q, std::span<const FunctionalDependency> fds, const AtomCaps& caps) {
    LinearProgram lp = entropy_program(q);
    add_query_constraints(lp, q, fds, caps);
    return lp;
}

double agm_bound(const Query& q, const std::map<std::string, double>& sizes) {
    std::vector<double> card;
    for (const auto& a : q.body()) {
        auto it = sizes.find(a.relation);
        if (it == sizes.end()) throw std::invalid_argument("missing size for relation " + a.relation);
        if (it->second < 1) throw std::invalid_argument("relation sizes must be at least 1");
        card.push_back(it->second);
    }
    const LpSolution sol = solve(agm_program(q));
    if (!sol.optimal()) throw std::runtime_error(std::string("fractional edge cover LP: ") + to_string(sol.status));
    double log_bound = 0.0;
    for (std::size_t j = 0; j < card.size(); ++j) log_bound += sol.values(static_cast<Eigen::Index>(j)) * std::log(card[j]);
    return std::exp(log_bound);
}

LinearProgram bound_program(BoundKind kind, const Query& q, std::span<const FunctionalDependency> fds,
                            const BoundOptions& options) {
    AtomCaps caps;
    if (options.per_relation_caps) {
        if (!options.rmax) throw std::invalid_argument("per-relation caps need rmax");
        caps = AtomCaps::from_sizes(q, options.sizes, *options.rmax);
    }
    switch (kind.kind()) {
        case BoundKind::Kind::agm: return agm_program(q);
        case BoundKind::Kind::agm_dual: return agm_dual_program(q);
        case BoundKind::Kind::polymatroid: return polymatroid_program(q, fds, *kind.mode(), caps);
        case BoundKind::Kind::renyi: return renyi_program(q, fds, caps);
    }
    throw std::logic_error("unknown bound kind");
}

BoundResult compute_bound(BoundKind kind, const Query& q, std::span<const FunctionalDependency> fds,
                          const BoundOptions& options) {
    const LinearProgram lp = bound_program(kind, q, fds, options);
    const LpSolution sol = solve(lp);
    if (sol.status == LpStatus::failed) throw std::runtime_error("LP solver failure: " + sol.message);

    BoundResult out;
    out.status = sol.status;
    out.lp_variables = lp.num_variables();
    out.lp_constraints = lp.num_constraints();
    if (sol.optimal()) {
        out.exponent = std::max(0.0, sol.objective);
        out.witness = sol.values;
        out.witness_names = lp.variable_names();
        if (options.rmax) out.concrete = std::pow(*options.rmax, out.exponent);
    }
    return out;
}

std::vector<ConstraintViolation> entropy_vector_feasible(const EntropyVector& h, const LinearProgram& program,
                                                         double tol) {
    if (h.values.size() != static_cast<Eigen::Index>(program.num_variables()))
        throw std::invalid_argument("entropy vector length does not match program width");
    std::vector<ConstraintViolation> out;
    const auto& cs = program.constraints();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double lhs = cs[i].coefficients.dot(h.values);
        bool ok = true;
        switch (cs[i].relation) {
            case Relation::less_equal: ok = lhs <= cs[i].rhs + tol; break;
            case Relation::greater_equal: ok = lhs >= cs[i].rhs - tol; break;
            case Relation::equal: ok = std::abs(lhs - cs[i].rhs) <= tol; break;
        }
        if (!ok) out.push_back({i, cs[i].name, lhs, cs[i].rhs});
    }
    return out;
}

}  // namespace qbound
