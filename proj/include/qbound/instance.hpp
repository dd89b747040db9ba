#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbound/entropy_vector.hpp"
#include "qbound/query.hpp"

namespace qbound {

using Value = std::int64_t;
using Row = std::vector<Value>;

// Rows are kept sorted and distinct.
struct Table {
    std::vector<std::string> columns;
    std::vector<Row> rows;

    std::size_t size() const { return rows.size(); }
    void normalize();
};

struct RelationInstance {
    std::string name;
    std::vector<std::string> attributes;  // labels only; evaluation is positional
    std::vector<Row> tuples;              // sorted, distinct

    void normalize();
};

class DatabaseInstance {
public:
    void add(RelationInstance r);
    const RelationInstance* find(const std::string& name) const;
    const std::map<std::string, RelationInstance>& relations() const { return relations_; }
    std::map<std::string, RelationInstance>& relations() { return relations_; }

    // Largest relation cardinality (0 for an empty database).
    std::size_t rmax() const;

    // Printable name of a value; integers print as themselves when no
    // symbol table is attached.
    std::string label(Value v) const;
    std::vector<std::string>& symbols() { return symbols_; }
    const std::vector<std::string>& symbols() const { return symbols_; }

private:
    std::map<std::string, RelationInstance> relations_;
    std::vector<std::string> symbols_;
};

struct EvalResult {
    Table result;  // projection on the head, deduplicated
    Table full;    // all satisfying assignments, columns = query variables
};

// Hash join over shared variables; atoms without shared variables fall back
// to a nested loop.  Throws std::invalid_argument on a missing relation.
EvalResult evaluate(const Query& q, const DatabaseInstance& db);

// Exact check of A -> B on a table, by column name.
bool table_fd_holds(const Table& t, const FunctionalDependency& fd);
// Positional check of an anchored dependency on a relation.
bool relation_fd_holds(const RelationInstance& r, const FdAnchor& anchor);

// True when every anchored dependency holds on its relation and every
// variable-level dependency holds on the full result.
bool satisfies_fds(const DatabaseInstance& db, const BoundProblem& problem, const EvalResult& eval);

struct ResultDistribution {
    std::vector<std::string> columns;
    std::map<Row, double> probabilities;

    double total() const;
};

ResultDistribution uniform_distribution(const Table& t);
ResultDistribution marginal(const ResultDistribution& dist, const std::vector<std::string>& columns);
double shannon_entropy(const ResultDistribution& dist);
double shannon_entropy(std::span<const double> probabilities);

// Entropies of every nonempty marginal, SubsetIndex order over the
// distribution's columns.  With rmax, values are divided by log2(rmax).
EntropyVector classical_entropy_vector(const ResultDistribution& dist, std::optional<double> rmax = std::nullopt);

// log|Q(D)| / log rmax(D); nullopt when the result is empty or rmax < 2.
std::optional<double> s_of(const Query& q, const DatabaseInstance& db);
std::optional<double> s_of(const EvalResult& eval, std::size_t rmax);

// H(X_var(Q)) / max_j H(X_{u_j}); nullopt when the denominator is 0.  The
// distribution's columns must be the query variables in order.
std::optional<double> ratio_H1(const Query& q, const ResultDistribution& dist);

struct SearchOptions {
    std::size_t domain_size = 2;
    std::size_t budget = 1;
    std::uint64_t seed = 0;
};

struct SearchResult {
    bool exhaustive = false;
    std::size_t instances_evaluated = 0;
    std::size_t instances_satisfying = 0;
    std::optional<double> best_s;
    DatabaseInstance best_db;
    std::size_t best_result_size = 0;
    std::size_t best_rmax = 0;
    bool all_sound = true;
    double agm_exponent = 0.0;
    double polymatroid_exponent = 0.0;
    std::optional<double> renyi_exponent;
};

// Maximizes s(Q, D) over FD-satisfying databases with values in
// 0..domain_size-1.  Exhaustive for domain_size <= 2, <= 3 variables and at
// most 16 candidate tuples; seeded hill climbing otherwise.
SearchResult worst_case_search(const BoundProblem& problem, const SearchOptions& options);

struct DistributionOptions {
    std::size_t domain_size = 3;
    std::size_t max_support = 0;  // 0: up to domain_size^n
    std::size_t attempts = 2000;
};

// Random distribution over query-variable tuples whose support satisfies
// every variable-level dependency.
ResultDistribution random_fd_distribution(const Query& q, std::span<const FunctionalDependency> var_fds,
                                          std::uint64_t seed, const DistributionOptions& options = {});

struct InstanceFile {
    DatabaseInstance db;
    // Optional weights block over query-variable tuples.
    std::optional<ResultDistribution> weights;
};

// Blocks of "relation Name(attrs)" / tuple lines / "end", plus optionally
// "weights(vars)" / "v1 v2 ... w" lines / "end".
InstanceFile parse_instance(const std::string& text);

}  // namespace qbound
