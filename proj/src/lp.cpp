#include "qbound/lp.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "qbound/simplex.hpp"

namespace qbound {

LinearProgram::LinearProgram(Sense sense, std::vector<std::string> variable_names)
    : sense_(sense), names_(std::move(variable_names)) {
    if (names_.empty()) throw std::invalid_argument("linear program needs at least one variable");
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size()) throw std::invalid_argument("duplicate variable names");
    const auto n = static_cast<Eigen::Index>(names_.size());
    objective_ = Eigen::VectorXd::Zero(n);
    lower_ = Eigen::VectorXd::Zero(n);
    upper_ = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
}

std::optional<std::size_t> LinearProgram::find_variable(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j)
        if (names_[j] == name) return j;
    return std::nullopt;
}

void LinearProgram::set_objective(Eigen::VectorXd c) {
    if (c.size() != objective_.size()) throw std::invalid_argument("objective width does not match variable count");
    objective_ = std::move(c);
}

void LinearProgram::add_constraint(std::string name, Eigen::VectorXd row, Relation rel, double rhs) {
    if (row.size() != objective_.size())
        throw std::invalid_argument("constraint " + name + ": width does not match variable count");
    if (!std::isfinite(rhs)) throw std::invalid_argument("constraint " + name + ": right-hand side must be finite");
    constraints_.push_back({std::move(name), std::move(row), rel, rhs});
}

void LinearProgram::set_bounds(std::size_t j, double lower, double upper) {
    if (!std::isfinite(lower)) throw std::invalid_argument("lower bounds must be finite");
    if (upper < lower) throw std::invalid_argument("upper bound below lower bound");
    lower_(static_cast<Eigen::Index>(j)) = lower;
    upper_(static_cast<Eigen::Index>(j)) = upper;
}

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::failed: return "failed";
    }
    return "failed";
}

LpSolution solve(const LinearProgram& lp, const SimplexOptions& options) {
    const auto n = static_cast<Eigen::Index>(lp.num_variables());
    const Eigen::VectorXd& lo = lp.lower_bounds();

    // Rows in the shifted variables x' = x - lo, equalities split in two.
    std::vector<Eigen::VectorXd> rows;
    std::vector<double> rhs;
    std::vector<bool> is_ge;
    auto push = [&](const Eigen::VectorXd& a, bool ge, double b) {
        if (b < 0) {
            rows.push_back(-a);
            rhs.push_back(-b);
            is_ge.push_back(!ge);
        } else {
            rows.push_back(a);
            rhs.push_back(b);
            is_ge.push_back(ge);
        }
    };
    for (const auto& c : lp.constraints()) {
        const double b = c.rhs - c.coefficients.dot(lo);
        if (c.relation != Relation::greater_equal) push(c.coefficients, false, b);
        if (c.relation != Relation::less_equal) push(c.coefficients, true, b);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isfinite(lp.upper_bounds()(j))) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e(j) = 1.0;
            push(e, false, lp.upper_bounds()(j) - lo(j));
        }
    }

    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
    Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        a.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        b(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    const Eigen::VectorXd c = lp.sense() == Sense::maximize ? lp.objective() : Eigen::VectorXd(-lp.objective());

    detail::DenseSimplex<double> simplex(a, b, is_ge, options.optimality_tol);
    auto res = simplex.run(c, options.pivot_limit);

    LpSolution sol;
    sol.pivots = res.pivots;
    switch (res.outcome) {
        case detail::SimplexOutcome::unbounded: sol.status = LpStatus::unbounded; return sol;
        case detail::SimplexOutcome::infeasible: sol.status = LpStatus::infeasible; return sol;
        case detail::SimplexOutcome::pivot_limit:
            sol.status = LpStatus::failed;
            sol.message = "pivot limit exhausted";
            return sol;
        case detail::SimplexOutcome::optimal: break;
    }
    sol.values = res.x + lo;
    sol.objective = lp.objective().dot(sol.values);
    if (auto bad = violated_constraints(lp, sol.values, options.feasibility_tol); !bad.empty()) {
        sol.status = LpStatus::failed;
        sol.message = "numerical breakdown: optimal basis violates " + std::to_string(bad.size()) + " constraint(s)";
        return sol;
    }
    sol.status = LpStatus::optimal;
    return sol;
}

std::vector<std::size_t> violated_constraints(const LinearProgram& lp, const Eigen::VectorXd& x, double tol) {
    if (x.size() != static_cast<Eigen::Index>(lp.num_variables()))
        throw std::invalid_argument("assignment width does not match variable count");
    std::vector<std::size_t> out;
    const auto& cs = lp.constraints();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double lhs = cs[i].coefficients.dot(x);
        bool ok = true;
        switch (cs[i].relation) {
            case Relation::less_equal: ok = lhs <= cs[i].rhs + tol; break;
            case Relation::greater_equal: ok = lhs >= cs[i].rhs - tol; break;
            case Relation::equal: ok = std::abs(lhs - cs[i].rhs) <= tol; break;
        }
        if (!ok) out.push_back(i);
    }
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x(j) < lp.lower_bounds()(j) - tol || x(j) > lp.upper_bounds()(j) + tol)
            out.push_back(cs.size() + static_cast<std::size_t>(j));
    }
    return out;
}

LinearProgram dualize(const LinearProgram& lp) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(lp.num_variables()); ++j)
        if (lp.lower_bounds()(j) != 0.0 || std::isfinite(lp.upper_bounds()(j)))
            throw std::invalid_argument("dualize requires variables bounded only by x >= 0");
    if (lp.num_constraints() == 0) throw std::invalid_argument("dualize requires at least one constraint");

    const bool max = lp.sense() == Sense::maximize;
    // Normal form: maximize with <= rows, or minimize with >= rows.
    const Relation normal = max ? Relation::less_equal : Relation::greater_equal;
    const auto m = static_cast<Eigen::Index>(lp.num_constraints());
    const auto n = static_cast<Eigen::Index>(lp.num_variables());
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    std::vector<std::string> dual_names;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& c = lp.constraints()[static_cast<std::size_t>(i)];
        if (c.relation == Relation::equal) throw std::invalid_argument("dualize does not support equality rows");
        const double s = c.relation == normal ? 1.0 : -1.0;
        a.row(i) = s * c.coefficients.transpose();
        b(i) = s * c.rhs;
        dual_names.push_back("y_" + c.name);
    }
    std::set<std::string> seen;
    for (auto& name : dual_names) {
        std::string base = name;
        for (int k = 2; !seen.insert(name).second; ++k) name = base + "_" + std::to_string(k);
    }

    LinearProgram dual(max ? Sense::minimize : Sense::maximize, dual_names);
    dual.set_objective(b);
    const Relation dual_rel = max ? Relation::greater_equal : Relation::less_equal;
    for (Eigen::Index j = 0; j < n; ++j)
        dual.add_constraint(lp.variable_names()[static_cast<std::size_t>(j)], a.col(j), dual_rel, lp.objective()(j));
    return dual;
}

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class NameSanitizer {
public:
    std::string operator()(const std::string& raw) {
        std::string s;
        for (char c : raw) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
        if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) s = "v" + s;
        std::string base = s;
        for (int k = 2; !used_.insert(s).second; ++k) s = base + "_" + std::to_string(k);
        return s;
    }

private:
    std::set<std::string> used_;
};

std::string linear_expression(const Eigen::VectorXd& coeffs, const std::vector<std::string>& names) {
    std::string out;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
        const double v = coeffs(j);
        if (v == 0.0) continue;
        out += v < 0 ? " - " : " + ";
        out += format_number(std::abs(v)) + " " + names[static_cast<std::size_t>(j)];
    }
    if (out.empty()) out = " 0 " + names.front();
    return out;
}

}  // namespace

std::string export_lp_format(const LinearProgram& lp) {
    NameSanitizer var_names;
    std::vector<std::string> vars;
    for (const auto& v : lp.variable_names()) vars.push_back(var_names(v));

    std::string out = "\\ generated by qbound\n";
    out += lp.sense() == Sense::maximize ? "Maximize\n" : "Minimize\n";
    out += " obj:" + linear_expression(lp.objective(), vars) + "\n";
    out += "Subject To\n";
    NameSanitizer row_names;
    std::size_t i = 0;
    for (const auto& c : lp.constraints()) {
        ++i;
        const std::string name = row_names(c.name.empty() ? "c" + std::to_string(i) : c.name);
        const char* rel = c.relation == Relation::less_equal ? "<=" : c.relation == Relation::equal ? "=" : ">=";
        out += " " + name + ":" + linear_expression(c.coefficients, vars) + " " + rel + " " + format_number(c.rhs) + "\n";
    }
    out += "Bounds\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double lo = lp.lower_bounds()(static_cast<Eigen::Index>(j));
        const double up = lp.upper_bounds()(static_cast<Eigen::Index>(j));
        if (std::isfinite(up))
            out += " " + format_number(lo) + " <= " + vars[j] + " <= " + format_number(up) + "\n";
        else
            out += " " + vars[j] + " >= " + format_number(lo) + "\n";
    }
    out += "End\n";
    return out;
}

}  // namespace qbound
