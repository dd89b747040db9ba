#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbound {

enum class Sense { maximize, minimize };
enum class Relation { less_equal, equal, greater_equal };

struct Constraint {
    std::string name;
    Eigen::VectorXd coefficients;
    Relation relation;
    double rhs;
};

// Dense LP over named variables.  Lower bounds default to 0, upper bounds to
// +inf.
class LinearProgram {
public:
    LinearProgram(Sense sense, std::vector<std::string> variable_names);

    Sense sense() const { return sense_; }
    std::size_t num_variables() const { return names_.size(); }
    std::size_t num_constraints() const { return constraints_.size(); }
    const std::vector<std::string>& variable_names() const { return names_; }
    const Eigen::VectorXd& objective() const { return objective_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const Eigen::VectorXd& lower_bounds() const { return lower_; }
    const Eigen::VectorXd& upper_bounds() const { return upper_; }

    std::optional<std::size_t> find_variable(const std::string& name) const;

    void set_objective(Eigen::VectorXd c);
    void set_objective_coefficient(std::size_t j, double c) { objective_(static_cast<Eigen::Index>(j)) = c; }
    void add_constraint(std::string name, Eigen::VectorXd row, Relation rel, double rhs);
    void set_bounds(std::size_t j, double lower, double upper = std::numeric_limits<double>::infinity());

private:
    Sense sense_;
    std::vector<std::string> names_;
    Eigen::VectorXd objective_;
    std::vector<Constraint> constraints_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

enum class LpStatus { optimal, unbounded, infeasible, failed };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::failed;
    double objective = 0.0;
    Eigen::VectorXd values;
    std::size_t pivots = 0;
    std::string message;

    bool optimal() const { return status == LpStatus::optimal; }
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    std::size_t pivot_limit = 50000;
};

LpSolution solve(const LinearProgram& lp, const SimplexOptions& options = {});

// Indices of constraints (and then, offset by num_constraints, of variable
// bounds) that `x` violates by more than `tol`.
std::vector<std::size_t> violated_constraints(const LinearProgram& lp, const Eigen::VectorXd& x, double tol = 1e-9);

// Textbook dual of a pure-inequality LP over x >= 0.  Throws
// std::invalid_argument on equality rows or non-default bounds.
LinearProgram dualize(const LinearProgram& lp);

// CPLEX LP format.
std::string export_lp_format(const LinearProgram& lp);

}  // namespace qbound
