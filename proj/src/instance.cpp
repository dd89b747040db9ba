#include "qbound/instance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "qbound/bounds.hpp"

namespace qbound {

namespace {

struct RowHash {
    std::size_t operator()(const Row& r) const {
        std::size_t h = 0x9e3779b97f4a7c15ULL;
        for (Value v : r) h ^= std::hash<Value>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

void sort_unique(std::vector<Row>& rows) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

std::vector<std::size_t> column_positions(const std::vector<std::string>& columns, const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& n : names) {
        auto it = std::find(columns.begin(), columns.end(), n);
        if (it == columns.end()) throw std::invalid_argument("unknown attribute " + n);
        out.push_back(static_cast<std::size_t>(it - columns.begin()));
    }
    return out;
}

Row project_row(const Row& r, const std::vector<std::size_t>& pos) {
    Row out;
    out.reserve(pos.size());
    for (auto p : pos) out.push_back(r[p]);
    return out;
}

bool fd_holds_on_rows(const std::vector<Row>& rows, const std::vector<std::size_t>& lhs,
                      const std::vector<std::size_t>& rhs) {
    std::unordered_map<Row, Row, RowHash> f;
    for (const auto& r : rows) {
        auto [it, fresh] = f.emplace(project_row(r, lhs), project_row(r, rhs));
        if (!fresh && it->second != project_row(r, rhs)) return false;
    }
    return true;
}

}  // namespace

void Table::normalize() { sort_unique(rows); }
void RelationInstance::normalize() { sort_unique(tuples); }

void DatabaseInstance::add(RelationInstance r) {
    for (const auto& t : r.tuples)
        if (t.size() != r.attributes.size())
            throw std::invalid_argument("relation " + r.name + ": tuple arity does not match attributes");
    r.normalize();
    relations_[r.name] = std::move(r);
}

const RelationInstance* DatabaseInstance::find(const std::string& name) const {
    auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : &it->second;
}

std::size_t DatabaseInstance::rmax() const {
    std::size_t m = 0;
    for (const auto& [name, r] : relations_) m = std::max(m, r.tuples.size());
    return m;
}

std::string DatabaseInstance::label(Value v) const {
    if (v >= 0 && static_cast<std::size_t>(v) < symbols_.size()) return symbols_[static_cast<std::size_t>(v)];
    return std::to_string(v);
}

// ---------------------------------------------------------------------------

EvalResult evaluate(const Query& q, const DatabaseInstance& db) {
    const std::size_t n = q.num_variables();
    std::vector<const RelationInstance*> rels;
    for (const auto& atom : q.body()) {
        const auto* r = db.find(atom.relation);
        if (!r) throw std::invalid_argument("database has no relation " + atom.relation);
        if (r->attributes.size() != atom.args.size())
            throw std::invalid_argument("relation " + atom.relation + " has the wrong arity");
        rels.push_back(r);
    }

    std::vector<Row> partial{Row(n, 0)};
    VarSet bound;
    for (std::size_t j = 0; j < q.body().size() && !partial.empty(); ++j) {
        const auto& args = q.body()[j].args;
        std::vector<std::size_t> var_of(args.size());
        for (std::size_t p = 0; p < args.size(); ++p) var_of[p] = *q.index_of(args[p]);

        // Positions whose variable is already bound form the join key; of the
        // remaining positions the first occurrence of each variable binds it.
        std::vector<std::size_t> key_pos, bind_pos, check_pos;
        VarSet seen = bound;
        for (std::size_t p = 0; p < args.size(); ++p) {
            const auto v = var_of[p];
            if (bound.contains(v)) key_pos.push_back(p);
            else if (seen.contains(v)) check_pos.push_back(p);
            else {
                bind_pos.push_back(p);
                seen = seen | VarSet::single(v);
            }
        }
        // First position binding each variable, for repeated-variable checks.
        std::vector<std::size_t> first_pos(n, args.size());
        for (auto p : bind_pos) first_pos[var_of[p]] = p;
        auto consistent = [&](const Row& t) {
            for (auto p : check_pos)
                if (first_pos[var_of[p]] < args.size() && t[first_pos[var_of[p]]] != t[p]) return false;
            return true;
        };
        auto extend = [&](const Row& base, const Row& t, std::vector<Row>& out) {
            Row r = base;
            for (auto p : bind_pos) r[var_of[p]] = t[p];
            out.push_back(std::move(r));
        };

        std::vector<Row> next;
        if (key_pos.empty()) {
            for (const auto& base : partial)
                for (const auto& t : rels[j]->tuples)
                    if (consistent(t)) extend(base, t, next);
        } else {
            std::unordered_map<Row, std::vector<const Row*>, RowHash> index;
            for (const auto& t : rels[j]->tuples)
                if (consistent(t)) index[project_row(t, key_pos)].push_back(&t);
            Row key(key_pos.size());
            for (const auto& base : partial) {
                for (std::size_t i = 0; i < key_pos.size(); ++i) key[i] = base[var_of[key_pos[i]]];
                auto it = index.find(key);
                if (it == index.end()) continue;
                for (const Row* t : it->second) extend(base, *t, next);
            }
        }
        partial = std::move(next);
        bound = seen;
    }

    EvalResult out;
    out.full.columns = q.variables();
    out.full.rows = std::move(partial);
    out.full.normalize();
    out.result.columns = q.head();
    std::vector<std::size_t> head_pos;
    for (const auto& v : q.head()) head_pos.push_back(*q.index_of(v));
    for (const auto& r : out.full.rows) out.result.rows.push_back(project_row(r, head_pos));
    out.result.normalize();
    return out;
}

bool table_fd_holds(const Table& t, const FunctionalDependency& fd) {
    return fd_holds_on_rows(t.rows, column_positions(t.columns, fd.lhs), column_positions(t.columns, fd.rhs));
}

bool relation_fd_holds(const RelationInstance& r, const FdAnchor& anchor) {
    for (auto p : anchor.lhs)
        if (p >= r.attributes.size()) throw std::invalid_argument("fd position outside relation " + r.name);
    for (auto p : anchor.rhs)
        if (p >= r.attributes.size()) throw std::invalid_argument("fd position outside relation " + r.name);
    return fd_holds_on_rows(r.tuples, anchor.lhs, anchor.rhs);
}

bool satisfies_fds(const DatabaseInstance& db, const BoundProblem& problem, const EvalResult& eval) {
    for (const auto& fd : problem.anchored_fds) {
        const auto* r = db.find(fd.anchor->relation);
        if (r && !relation_fd_holds(*r, *fd.anchor)) return false;
    }
    for (const auto& fd : problem.var_fds)
        if (!table_fd_holds(eval.full, fd)) return false;
    return true;
}

// ---------------------------------------------------------------------------

double ResultDistribution::total() const {
    double s = 0.0;
    for (const auto& [r, p] : probabilities) s += p;
    return s;
}

ResultDistribution uniform_distribution(const Table& t) {
    ResultDistribution d{t.columns, {}};
    for (const auto& r : t.rows) d.probabilities[r] = 1.0 / static_cast<double>(t.rows.size());
    return d;
}

ResultDistribution marginal(const ResultDistribution& dist, const std::vector<std::string>& columns) {
    if (columns.empty()) throw std::invalid_argument("marginal over the empty set");
    const auto pos = column_positions(dist.columns, columns);
    ResultDistribution out{columns, {}};
    for (const auto& [r, p] : dist.probabilities) out.probabilities[project_row(r, pos)] += p;
    return out;
}

double shannon_entropy(std::span<const double> probabilities) {
    double h = 0.0;
    for (double p : probabilities)
        if (p > 0.0) h -= p * std::log2(p);
    return std::max(0.0, h);
}

double shannon_entropy(const ResultDistribution& dist) {
    std::vector<double> p;
    for (const auto& [r, x] : dist.probabilities) p.push_back(x);
    return shannon_entropy(p);
}

EntropyVector classical_entropy_vector(const ResultDistribution& dist, std::optional<double> rmax) {
    if (rmax && *rmax < 2) throw std::invalid_argument("normalization needs rmax >= 2");
    const std::size_t n = dist.columns.size();
    SubsetIndex idx(n);
    EntropyVector out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.count())), rmax.has_value()};
    const double scale = rmax ? 1.0 / std::log2(*rmax) : 1.0;
    for (std::size_t i = 1; i <= idx.count(); ++i) {
        std::vector<std::string> cols;
        const VarSet s = idx.subset(i);
        for (std::size_t c = 0; c < n; ++c)
            if (s.contains(c)) cols.push_back(dist.columns[c]);
        out[s] = shannon_entropy(marginal(dist, cols)) * scale;
    }
    return out;
}

std::optional<double> s_of(const EvalResult& eval, std::size_t rmax) {
    if (eval.result.size() == 0 || rmax < 2) return std::nullopt;
    return std::log2(static_cast<double>(eval.result.size())) / std::log2(static_cast<double>(rmax));
}

std::optional<double> s_of(const Query& q, const DatabaseInstance& db) {
    std::size_t rmax = 0;
    for (const auto& a : q.body())
        if (const auto* r = db.find(a.relation)) rmax = std::max(rmax, r->tuples.size());
    return s_of(evaluate(q, db), rmax);
}

std::optional<double> ratio_H1(const Query& q, const ResultDistribution& dist) {
    if (dist.columns != q.variables()) throw std::invalid_argument("distribution columns must be the query variables");
    double denom = 0.0;
    for (const auto& atom : q.body()) {
        std::vector<std::string> cols = atom.args;
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        denom = std::max(denom, shannon_entropy(marginal(dist, cols)));
    }
    if (denom <= 1e-12) return std::nullopt;
    return shannon_entropy(dist) / denom;
}

// ---------------------------------------------------------------------------

namespace {

struct Slot {
    std::string relation;
    Row tuple;
};

std::vector<Slot> candidate_slots(const Query& q, std::size_t k) {
    std::vector<Slot> out;
    for (const auto& [rel, arity] : q.relation_arities()) {
        Row t(arity, 0);
        for (;;) {
            out.push_back({rel, t});
            std::size_t p = arity;
            while (p > 0 && static_cast<std::size_t>(++t[p - 1]) == k) t[--p] = 0;
            if (p == 0) break;
        }
    }
    return out;
}

DatabaseInstance empty_db(const Query& q, std::size_t k) {
    DatabaseInstance db;
    for (const auto& atom : q.body()) {
        if (db.find(atom.relation)) continue;
        db.add({atom.relation, atom.args, {}});
    }
    for (std::size_t v = 0; v < k; ++v) db.symbols().push_back(std::to_string(v));
    return db;
}

class Searcher {
public:
    Searcher(const BoundProblem& problem, const SearchOptions& options)
        : p_(problem), opt_(options), slots_(candidate_slots(problem.query, options.domain_size)) {
        const Query& q = p_.query;
        res_.agm_exponent = compute_bound(BoundKind::agm(), q, {}).exponent;
        res_.polymatroid_exponent = compute_bound(BoundKind::polymatroid(), q, p_.var_fds).exponent;
        auto renyi = compute_bound(BoundKind::renyi(), q, p_.var_fds);
        if (renyi.bounded()) res_.renyi_exponent = renyi.exponent;
        res_.best_db = empty_db(q, options.domain_size);
    }

    SearchResult run() {
        const Query& q = p_.query;
        if (opt_.domain_size <= 2 && q.num_variables() <= 3 && slots_.size() <= 16) {
            res_.exhaustive = true;
            for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << slots_.size()); ++mask) {
                DatabaseInstance db = empty_db(q, opt_.domain_size);
                for (std::size_t i = 0; i < slots_.size(); ++i)
                    if ((mask >> i) & 1U) db.relations()[slots_[i].relation].tuples.push_back(slots_[i].tuple);
                for (auto& [name, r] : db.relations()) r.normalize();
                score(db);
            }
        } else {
            hill_climb();
        }
        return std::move(res_);
    }

private:
    // Returns s for FD-satisfying databases, nullopt otherwise.
    std::optional<double> score(const DatabaseInstance& db) {
        ++res_.instances_evaluated;
        const EvalResult eval = evaluate(p_.query, db);
        if (!satisfies_fds(db, p_, eval)) return std::nullopt;
        ++res_.instances_satisfying;
        const std::size_t rmax = db.rmax();
        const auto s = s_of(eval, rmax);
        if (!s) return std::nullopt;
        const double tol = 1e-9;
        if (*s > res_.agm_exponent + tol || *s > res_.polymatroid_exponent + tol ||
            (res_.renyi_exponent && *s > *res_.renyi_exponent + tol))
            res_.all_sound = false;
        if (!res_.best_s || *s > *res_.best_s + 1e-12) {
            res_.best_s = s;
            res_.best_db = db;
            res_.best_result_size = eval.result.size();
            res_.best_rmax = rmax;
        }
        return s;
    }

    bool contains(const DatabaseInstance& db, const Slot& s) const {
        const auto& t = db.find(s.relation)->tuples;
        return std::binary_search(t.begin(), t.end(), s.tuple);
    }

    // Adds the slot, deleting tuples that collide with it under an anchored
    // dependency.
    DatabaseInstance with_added(const DatabaseInstance& db, const Slot& s) const {
        DatabaseInstance out = db;
        auto& tuples = out.relations()[s.relation].tuples;
        for (const auto& fd : p_.anchored_fds) {
            if (fd.anchor->relation != s.relation) continue;
            const Row key = project_row(s.tuple, fd.anchor->lhs);
            const Row val = project_row(s.tuple, fd.anchor->rhs);
            std::erase_if(tuples, [&](const Row& t) {
                return project_row(t, fd.anchor->lhs) == key && project_row(t, fd.anchor->rhs) != val;
            });
        }
        tuples.push_back(s.tuple);
        out.relations()[s.relation].normalize();
        return out;
    }

    DatabaseInstance with_removed(const DatabaseInstance& db, const Slot& s) const {
        DatabaseInstance out = db;
        std::erase(out.relations()[s.relation].tuples, s.tuple);
        return out;
    }

    void hill_climb() {
        const Query& q = p_.query;
        std::mt19937_64 rng(opt_.seed);
        const std::size_t restarts = 10 * std::max<std::size_t>(opt_.budget, 1);
        const std::size_t steps = 4 * slots_.size() + 16;
        std::uniform_int_distribution<std::size_t> pick(0, slots_.size() - 1);
        for (std::size_t r = 0; r < restarts; ++r) {
            // Greedy FD-preserving fill in random order; the first restart
            // keeps every slot it can.
            std::vector<std::size_t> order(slots_.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            const double density = r == 0 ? 1.0 : 0.2 + 0.8 * coin(rng);
            DatabaseInstance cur = empty_db(q, opt_.domain_size);
            for (auto i : order) {
                if (coin(rng) > density) continue;
                DatabaseInstance cand = with_added(cur, slots_[i]);
                const EvalResult eval = evaluate(q, cand);
                if (satisfies_fds(cand, p_, eval)) cur = std::move(cand);
            }
            std::optional<double> cur_s = score(cur);
            for (std::size_t step = 0; step < steps; ++step) {
                const Slot& s = slots_[pick(rng)];
                DatabaseInstance cand = contains(cur, s) ? with_removed(cur, s) : with_added(cur, s);
                const auto cand_s = score(cand);
                if (!cand_s) continue;
                if (!cur_s || *cand_s >= *cur_s) {
                    cur = std::move(cand);
                    cur_s = cand_s;
                }
            }
        }
    }

    const BoundProblem& p_;
    SearchOptions opt_;
    std::vector<Slot> slots_;
    SearchResult res_;
};

}  // namespace

SearchResult worst_case_search(const BoundProblem& problem, const SearchOptions& options) {
    if (options.domain_size < 2) throw std::invalid_argument("domain size must be at least 2");
    return Searcher(problem, options).run();
}

ResultDistribution random_fd_distribution(const Query& q, std::span<const FunctionalDependency> var_fds,
                                          std::uint64_t seed, const DistributionOptions& options) {
    const std::size_t n = q.num_variables();
    const std::size_t k = std::max<std::size_t>(options.domain_size, 1);
    double space = 1.0;
    for (std::size_t i = 0; i < n; ++i) space *= static_cast<double>(k);
    std::size_t cap = options.max_support ? options.max_support : static_cast<std::size_t>(std::min(space, 4096.0));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size_dist(1, std::max<std::size_t>(cap, 1));
    const std::size_t target = size_dist(rng);
    std::uniform_int_distribution<Value> value(0, static_cast<Value>(k) - 1);

    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> fd_pos;
    for (const auto& fd : var_fds) {
        std::vector<std::size_t> l, r;
        for (const auto& v : fd.lhs) l.push_back(*q.index_of(v));
        for (const auto& v : fd.rhs) r.push_back(*q.index_of(v));
        fd_pos.emplace_back(std::move(l), std::move(r));
    }
    std::vector<std::map<Row, Row>> maps(fd_pos.size());
    std::set<Row> support;
    for (std::size_t attempt = 0; attempt < options.attempts && support.size() < target; ++attempt) {
        Row t(n);
        for (auto& v : t) v = value(rng);
        if (support.contains(t)) continue;
        bool ok = true;
        for (std::size_t f = 0; f < fd_pos.size() && ok; ++f) {
            auto it = maps[f].find(project_row(t, fd_pos[f].first));
            ok = it == maps[f].end() || it->second == project_row(t, fd_pos[f].second);
        }
        if (!ok) continue;
        for (std::size_t f = 0; f < fd_pos.size(); ++f)
            maps[f].emplace(project_row(t, fd_pos[f].first), project_row(t, fd_pos[f].second));
        support.insert(std::move(t));
    }
    if (support.empty()) throw std::runtime_error("random_fd_distribution: sampling budget exhausted");

    ResultDistribution out{q.variables(), {}};
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    const bool uniform = std::uniform_int_distribution<int>(0, 2)(rng) == 0;
    double total = 0.0;
    for (const auto& t : support) total += out.probabilities[t] = uniform ? 1.0 : weight(rng);
    for (auto& [t, p] : out.probabilities) p /= total;
    return out;
}

// ---------------------------------------------------------------------------

InstanceFile parse_instance(const std::string& text) {
    InstanceFile out;
    std::map<std::string, Value> intern;
    auto value_of = [&](const std::string& tok) {
        auto [it, fresh] = intern.emplace(tok, static_cast<Value>(out.db.symbols().size()));
        if (fresh) out.db.symbols().push_back(tok);
        return it->second;
    };
    auto fail = [](std::size_t line, const std::string& msg) -> void {
        throw ParseError(line, 1, msg);
    };
    auto header = [&](const std::string& line, std::size_t lineno, std::string& name, std::vector<std::string>& attrs) {
        const auto open = line.find('('), close = line.rfind(')');
        if (open == std::string::npos || close == std::string::npos || close < open) fail(lineno, "malformed block header");
        name = line.substr(0, open);
        name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
        std::stringstream ss(line.substr(open + 1, close - open - 1));
        for (std::string a; std::getline(ss, a, ',');) {
            a.erase(std::remove_if(a.begin(), a.end(), ::isspace), a.end());
            if (a.empty()) fail(lineno, "empty attribute name");
            attrs.push_back(a);
        }
        if (attrs.empty()) fail(lineno, "block needs at least one attribute");
    };

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    enum class Mode { none, relation, weights } mode = Mode::none;
    RelationInstance cur;
    ResultDistribution weights;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        if (toks.empty()) continue;
        if (mode == Mode::none) {
            if (toks[0] == "relation") {
                cur = {};
                header(line.substr(line.find("relation") + 8), lineno, cur.name, cur.attributes);
                if (cur.name.empty()) fail(lineno, "relation block without a name");
                if (out.db.find(cur.name)) fail(lineno, "duplicate relation " + cur.name);
                mode = Mode::relation;
            } else if (toks[0].rfind("weights", 0) == 0) {
                std::string name;
                weights = {};
                header(line, lineno, name, weights.columns);
                if (name != "weights") fail(lineno, "unknown block '" + name + "'");
                if (out.weights) fail(lineno, "duplicate weights block");
                mode = Mode::weights;
            } else {
                fail(lineno, "expected 'relation' or 'weights', found '" + toks[0] + "'");
            }
            continue;
        }
        if (toks.size() == 1 && toks[0] == "end") {
            if (mode == Mode::relation) {
                out.db.add(std::move(cur));
            } else {
                const double total = weights.total();
                if (total <= 0) fail(lineno, "weights must have a positive sum");
                for (auto& [r, p] : weights.probabilities) p /= total;
                out.weights = std::move(weights);
            }
            mode = Mode::none;
            continue;
        }
        if (mode == Mode::relation) {
            if (toks.size() != cur.attributes.size())
                fail(lineno, "tuple arity " + std::to_string(toks.size()) + " does not match relation " + cur.name);
            Row r;
            for (const auto& t : toks) r.push_back(value_of(t));
            cur.tuples.push_back(std::move(r));
        } else {
            if (toks.size() != weights.columns.size() + 1) fail(lineno, "weight line needs one value per column plus a weight");
            Row r;
            for (std::size_t i = 0; i + 1 < toks.size(); ++i) r.push_back(value_of(toks[i]));
            double w = 0;
            try {
                w = std::stod(toks.back());
            } catch (const std::exception&) {
                fail(lineno, "invalid weight '" + toks.back() + "'");
            }
            if (!(w >= 0) || !std::isfinite(w)) fail(lineno, "weights must be finite and non-negative");
            weights.probabilities[r] += w;
        }
    }
    if (mode != Mode::none) fail(lineno, "unterminated block (missing 'end')");
    return out;
}

}  // namespace qbound
