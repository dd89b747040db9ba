#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbound {

// Set of query variables as a bitmask; bit i is the i-th variable in
// lexicographic order.
struct VarSet {
    std::uint32_t bits = 0;

    constexpr VarSet() = default;
    constexpr explicit VarSet(std::uint32_t b) : bits(b) {}

    static constexpr VarSet single(std::size_t i) { return VarSet{std::uint32_t{1} << i}; }
    static constexpr VarSet full(std::size_t n) {
        return VarSet{n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1};
    }

    constexpr bool empty() const { return bits == 0; }
    constexpr bool contains(std::size_t i) const { return (bits >> i) & 1U; }
    constexpr bool subset_of(VarSet o) const { return (bits & ~o.bits) == 0; }
    int size() const { return __builtin_popcount(bits); }

    constexpr VarSet operator|(VarSet o) const { return VarSet{bits | o.bits}; }
    constexpr VarSet operator&(VarSet o) const { return VarSet{bits & o.bits}; }
    constexpr VarSet without(VarSet o) const { return VarSet{bits & ~o.bits}; }
    constexpr bool operator==(const VarSet&) const = default;
    constexpr auto operator<=>(const VarSet&) const = default;
};

struct Atom {
    std::string relation;
    std::vector<std::string> args;

    bool operator==(const Atom&) const = default;
};

// A conjunctive query Q(u0) :- R1(u1), ..., Rm(um).  Variables are kept in
// lexicographic order; that order fixes every subset-indexed layout.
class Query {
public:
    Query(std::string name, std::vector<std::string> head, std::vector<Atom> body);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& head() const { return head_; }
    const std::vector<Atom>& body() const { return body_; }
    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t num_variables() const { return vars_.size(); }

    std::optional<std::size_t> index_of(const std::string& var) const;
    VarSet mask_of(std::span<const std::string> vars) const;
    VarSet head_set() const { return mask_of(head_); }
    VarSet atom_set(std::size_t j) const { return mask_of(body_.at(j).args); }
    VarSet all() const { return VarSet::full(vars_.size()); }
    std::vector<std::string> names_of(VarSet s) const;

    // Arity per relation name; all atoms over one relation share it.
    std::map<std::string, std::size_t> relation_arities() const;

    bool operator==(const Query& o) const {
        return name_ == o.name_ && head_ == o.head_ && body_ == o.body_;
    }

private:
    std::string name_;
    std::vector<std::string> head_;
    std::vector<Atom> body_;
    std::vector<std::string> vars_;
};

// Positions (0-based) inside every atom of `relation`.
struct FdAnchor {
    std::string relation;
    std::vector<std::size_t> lhs;
    std::vector<std::size_t> rhs;

    bool operator==(const FdAnchor&) const = default;
};

// A -> B.  lhs/rhs are sorted, duplicate-free variable names.  Anchored
// dependencies keep their relation positions for the chase and for
// table-level checks.
struct FunctionalDependency {
    std::vector<std::string> lhs;
    std::vector<std::string> rhs;
    std::optional<FdAnchor> anchor;

    bool operator==(const FunctionalDependency&) const = default;
};

// Sorts both sides, removes lhs variables from rhs.  Returns nullopt when
// the dependency is trivial after normalization.
std::optional<FunctionalDependency> normalize_fd(FunctionalDependency fd);

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct ProblemSpec {
    Query query;
    // Variable-level dependencies as written, plus anchored ones.  Anchored
    // dependencies are lifted separately by lift_fds.
    std::vector<FunctionalDependency> fds;
    std::map<std::string, double> sizes;
};

ProblemSpec parse_spec(const std::string& text);

std::string to_string(const Query& q);
std::string to_string(const FunctionalDependency& fd);
// Emits text accepted by parse_spec.
std::string to_dsl(const ProblemSpec& spec);

// Variable-level view of `fds` against `query`: variable-level entries are
// kept, anchored ones are instantiated once per matching atom.  Normalized
// and deduplicated; trivial ones dropped.
std::vector<FunctionalDependency> lift_fds(const Query& query, std::span<const FunctionalDependency> fds);

struct ChaseResult {
    Query query;
    // Old variable name -> surviving variable name, for every unified variable.
    std::map<std::string, std::string> renaming;
};

ChaseResult chase_detailed(const Query& query, std::span<const FunctionalDependency> fds);
Query chase(const Query& query, std::span<const FunctionalDependency> fds);

// Chased query together with the variable-level dependencies that the bound
// programs consume.  Anchored dependencies are carried along for instance
// checks.
struct BoundProblem {
    Query query;
    std::vector<FunctionalDependency> var_fds;
    std::vector<FunctionalDependency> anchored_fds;
};

BoundProblem prepare(const Query& query, std::span<const FunctionalDependency> fds);

struct Hypergraph {
    std::vector<std::string> vertices;
    std::vector<VarSet> edges;  // one per body atom, duplicates kept
};

Hypergraph hypergraph(const Query& query);

// Bijection between nonempty subsets of n variables and 1..2^n-1, ordered by
// bitmask value.  Position in a dense vector is index - 1.
class SubsetIndex {
public:
    explicit SubsetIndex(std::size_t n);

    std::size_t n() const { return n_; }
    std::size_t count() const { return (std::size_t{1} << n_) - 1; }
    std::size_t index(VarSet s) const;
    VarSet subset(std::size_t index) const;
    std::size_t position(VarSet s) const { return index(s) - 1; }

private:
    std::size_t n_;
};

}  // namespace qbound
