#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbound/entropy_vector.hpp"
#include "qbound/lp.hpp"
#include "qbound/query.hpp"

namespace qbound {

enum class PolymatroidMode {
    paper_literal,  // monotonicity h(V) >= h({j}) only
    elemental,      // monotonicity h(V) >= h(V - {j})
};

class BoundKind {
public:
    enum class Kind { agm, agm_dual, polymatroid, renyi };

    static BoundKind agm() { return BoundKind(Kind::agm, std::nullopt); }
    static BoundKind agm_dual() { return BoundKind(Kind::agm_dual, std::nullopt); }
    static BoundKind polymatroid(PolymatroidMode m = PolymatroidMode::elemental) { return BoundKind(Kind::polymatroid, m); }
    static BoundKind renyi() { return BoundKind(Kind::renyi, std::nullopt); }

    Kind kind() const { return kind_; }
    std::optional<PolymatroidMode> mode() const { return mode_; }

private:
    BoundKind(Kind k, std::optional<PolymatroidMode> m) : kind_(k), mode_(m) {}
    Kind kind_;
    std::optional<PolymatroidMode> mode_;
};

std::string to_string(BoundKind k);
const char* to_string(PolymatroidMode m);

// Right-hand sides for the per-atom caps h(u_j) <= cap_j.  Empty means the
// uniform cap 1 (all relations normalized by rmax).
struct AtomCaps {
    std::vector<double> caps;

    // cap_j = log|R_j| / log rmax.  Throws when a size is missing or rmax < 2.
    static AtomCaps from_sizes(const Query& q, const std::map<std::string, double>& sizes, double rmax);
};

LinearProgram agm_program(const Query& q);
LinearProgram agm_dual_program(const Query& q);
LinearProgram polymatroid_program(const Query& q, std::span<const FunctionalDependency> fds,
                                  PolymatroidMode mode = PolymatroidMode::elemental, const AtomCaps& caps = {});
LinearProgram renyi_program(const Query& q, std::span<const FunctionalDependency> fds, const AtomCaps& caps = {});

// Name of the LP column holding h(S).
std::string entropy_variable_name(const Query& q, VarSet s);

// prod_R |R|^{x_R} at the optimal fractional edge cover.
double agm_bound(const Query& q, const std::map<std::string, double>& sizes);

struct BoundResult {
    LpStatus status = LpStatus::failed;
    double exponent = std::numeric_limits<double>::infinity();
    std::optional<double> concrete;
    Eigen::VectorXd witness;
    std::vector<std::string> witness_names;
    std::size_t lp_variables = 0;
    std::size_t lp_constraints = 0;

    bool bounded() const { return status == LpStatus::optimal; }
};

struct BoundOptions {
    std::optional<double> rmax;
    // Opt-in per-relation caps log|R_j|/log rmax instead of 1.
    bool per_relation_caps = false;
    std::map<std::string, double> sizes;
};

// FDs must be variable-level; they are ignored by agm and agm_dual.
LinearProgram bound_program(BoundKind kind, const Query& q, std::span<const FunctionalDependency> fds,
                            const BoundOptions& options = {});
BoundResult compute_bound(BoundKind kind, const Query& q, std::span<const FunctionalDependency> fds,
                          const BoundOptions& options = {});

struct ConstraintViolation {
    std::size_t index;
    std::string name;
    double lhs;
    double rhs;
};

// Evaluates every constraint of an entropy-variable program at `h`; the
// objective is ignored.
std::vector<ConstraintViolation> entropy_vector_feasible(const EntropyVector& h, const LinearProgram& program,
                                                         double tol = 1e-9);

}  // namespace qbound
