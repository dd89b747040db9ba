#include "qbound/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "qbound/quantum.hpp"

namespace qbound {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

ProblemSpec parse_or_throw(const std::string& text) {
    try {
        return parse_spec(text);
    } catch (const ParseError& e) {
        throw InputError(std::string("spec: ") + e.what());
    }
}

json fds_json(const std::vector<FunctionalDependency>& fds) {
    json out = json::array();
    for (const auto& fd : fds) out.push_back(to_string(fd));
    return out;
}

std::string subset_key(const std::vector<std::string>& names) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
    return s;
}

json vector_json(const Query& q, const EntropyVector& h) {
    json out = json::object();
    SubsetIndex idx(q.num_variables());
    for (std::size_t i = 1; i <= idx.count(); ++i) out[subset_key(q.names_of(idx.subset(i)))] = h[idx.subset(i)];
    return out;
}

BoundResult bound_or_throw(BoundKind kind, const Query& q, std::span<const FunctionalDependency> fds,
                           const BoundOptions& options) {
    try {
        return compute_bound(kind, q, fds, options);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    } catch (const std::runtime_error& e) {
        throw SolverFailure(e.what());
    }
}

json rounded(const json& j) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (!std::isfinite(v)) return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        double r = std::strtod(buf, nullptr);
        return r == 0.0 ? 0.0 : r;  // no negative zero
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& x : j) out.push_back(rounded(x));
        return out;
    }
    return j;
}

void flatten(const json& j, const std::string& prefix, std::string& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out += prefix + " = " + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

}  // namespace

std::string spec_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_alpha(double alpha) {
    if (std::isinf(alpha)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", alpha);
    return buf;
}

// ---------------------------------------------------------------------------

SolveOutput solve_report(const std::string& spec_text, const SolveOptions& options) {
    const auto start = Clock::now();
    const ProblemSpec spec = parse_or_throw(spec_text);
    const BoundProblem problem = prepare(spec.query, spec.fds);

    BoundOptions bopt;
    bopt.rmax = options.rmax;
    if (!bopt.rmax && !spec.sizes.empty()) {
        double m = 0;
        for (const auto& [rel, n] : spec.sizes) m = std::max(m, n);
        bopt.rmax = m;
    }
    bopt.per_relation_caps = options.per_relation_caps;
    bopt.sizes = spec.sizes;

    LinearProgram lp = [&] {
        try {
            return bound_program(options.kind, problem.query, problem.var_fds, bopt);
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }();
    const BoundResult res = bound_or_throw(options.kind, problem.query, problem.var_fds, bopt);

    json r;
    r["command"] = "solve";
    r["spec_hash"] = spec_hash(spec_text);
    r["query"] = to_string(spec.query);
    r["chased_query"] = to_string(problem.query);
    r["fds"] = fds_json(problem.var_fds);
    r["bound"]["kind"] = to_string(options.kind);
    if (options.kind.mode()) r["bound"]["mode"] = to_string(*options.kind.mode());
    if (bopt.rmax) r["bound"]["rmax"] = *bopt.rmax;
    r["bound"]["per_relation_caps"] = options.per_relation_caps;
    r["lp"]["variables"] = res.lp_variables;
    r["lp"]["constraints"] = res.lp_constraints;
    r["status"] = to_string(res.status);
    if (res.status == LpStatus::optimal) {
        r["exponent"] = res.exponent;
        if (res.concrete) r["concrete_bound"] = *res.concrete;
        json w = json::object();
        for (std::size_t j = 0; j < res.witness_names.size(); ++j)
            w[res.witness_names[j]] = res.witness(static_cast<Eigen::Index>(j));
        r["witness"] = w;
        if (options.kind.kind() == BoundKind::Kind::agm && !spec.sizes.empty()) {
            try {
                r["agm_size_bound"] = agm_bound(problem.query, spec.sizes);
            } catch (const std::invalid_argument&) {
                // Sizes incomplete; the rmax form above still applies.
            }
        }
    } else if (res.status == LpStatus::unbounded) {
        r["exponent"] = "inf";
        r["note"] = "the program is unbounded: no nontrivial size bound follows from these constraints";
    }
    if (options.include_timing) r["timing_ms"] = elapsed_ms(start);
    return {std::move(r), export_lp_format(lp)};
}

// ---------------------------------------------------------------------------

json verify_report(const std::string& spec_text, const VerifyOptions& options) {
    const auto start = Clock::now();
    const ProblemSpec spec = parse_or_throw(spec_text);
    const BoundProblem problem = prepare(spec.query, spec.fds);
    if (options.search.domain_size < 2) throw InputError("--domain-size must be at least 2");

    SearchResult search;
    try {
        search = worst_case_search(problem, options.search);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    // Ratios compare against the program for the full-variable head.
    const Query& q = problem.query;
    const Query full_head(q.name(), q.variables(), q.body());
    const double full_poly = bound_or_throw(BoundKind::polymatroid(), full_head, problem.var_fds, {}).exponent;
    std::size_t defined = 0, violations = 0;
    std::optional<double> best_ratio;
    for (std::size_t i = 0; i < options.samples; ++i) {
        DistributionOptions dopt;
        dopt.domain_size = options.search.domain_size;
        const auto dist = random_fd_distribution(q, problem.var_fds, options.search.seed * 1000003ULL + i, dopt);
        const auto ratio = ratio_H1(q, dist);
        if (!ratio) continue;
        ++defined;
        if (*ratio > full_poly + 1e-9) ++violations;
        if (!best_ratio || *ratio > *best_ratio) best_ratio = ratio;
    }

    json r;
    r["command"] = "verify";
    r["spec_hash"] = spec_hash(spec_text);
    r["query"] = to_string(spec.query);
    r["chased_query"] = to_string(q);
    r["fds"] = fds_json(problem.var_fds);
    r["domain_size"] = options.search.domain_size;
    r["budget"] = options.search.budget;
    r["seed"] = options.search.seed;

    json& s = r["search"];
    s["mode"] = search.exhaustive ? "exhaustive" : "hill_climbing";
    s["instances_evaluated"] = search.instances_evaluated;
    s["instances_satisfying_fds"] = search.instances_satisfying;
    if (search.best_s) {
        s["best_s"] = *search.best_s;
        s["best_result_size"] = search.best_result_size;
        s["best_rmax"] = search.best_rmax;
        json inst = json::object();
        for (const auto& [name, rel] : search.best_db.relations()) {
            json rows = json::array();
            for (const auto& t : rel.tuples) {
                json row = json::array();
                for (Value v : t) row.push_back(search.best_db.label(v));
                rows.push_back(row);
            }
            inst[name] = rows;
        }
        s["best_instance"] = inst;
        r["status"] = "optimal";
    } else {
        s["best_s"] = nullptr;
        r["status"] = "undefined";
    }

    auto bound_entry = [&](std::optional<double> exponent) {
        json b;
        if (!exponent) {
            b["exponent"] = "inf";
            return b;
        }
        b["exponent"] = *exponent;
        if (search.best_s) b["gap"] = *exponent - *search.best_s;
        return b;
    };
    r["bounds"]["agm"] = bound_entry(search.agm_exponent);
    r["bounds"]["polymatroid"] = bound_entry(search.polymatroid_exponent);
    r["bounds"]["renyi"] = bound_entry(search.renyi_exponent);

    json& h = r["sampled_ratio_h1"];
    h["samples"] = options.samples;
    h["defined"] = defined;
    h["violations"] = violations;
    h["full_head_polymatroid_exponent"] = full_poly;
    h["best"] = best_ratio ? json(*best_ratio) : json(nullptr);

    r["sound"] = search.all_sound && violations == 0;
    if (options.include_timing) r["timing_ms"] = elapsed_ms(start);
    return r;
}

// ---------------------------------------------------------------------------

json entropy_report(const std::string& spec_text, const std::string& instance_text, const EntropyOptions& options) {
    const auto start = Clock::now();
    const ProblemSpec spec = parse_or_throw(spec_text);
    const Query& q = spec.query;
    const auto var_fds = lift_fds(q, spec.fds);

    InstanceFile inst;
    try {
        inst = parse_instance(instance_text);
    } catch (const ParseError& e) {
        throw InputError(std::string("instance: ") + e.what());
    }
    EvalResult eval;
    try {
        eval = evaluate(q, inst.db);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("instance: ") + e.what());
    }
    if (eval.full.size() == 0) throw InputError("the query result on this instance is empty");

    ResultDistribution dist;
    if (inst.weights) {
        const auto& w = *inst.weights;
        std::vector<std::string> sorted = w.columns;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != q.variables()) throw InputError("weights block must list exactly the query variables");
        dist = marginal(w, q.variables());
        for (const auto& [row, p] : dist.probabilities)
            if (p > 0 && !std::binary_search(eval.full.rows.begin(), eval.full.rows.end(), row))
                throw InputError("weighted tuple is not in the query result");
    } else {
        dist = uniform_distribution(eval.full);
    }

    // Local dimension of each variable = its active domain in the support.
    const std::size_t n = q.num_variables();
    std::vector<std::vector<Value>> domains(n);
    for (const auto& [row, p] : dist.probabilities)
        for (std::size_t i = 0; i < n; ++i) domains[i].push_back(row[i]);
    std::vector<std::size_t> dims;
    for (auto& d : domains) {
        std::sort(d.begin(), d.end());
        d.erase(std::unique(d.begin(), d.end()), d.end());
        dims.push_back(d.size());
    }
    SubsystemLayout layout(q.variables(), dims);
    std::vector<std::pair<Tuple, double>> weighted;
    for (const auto& [row, p] : dist.probabilities) {
        Tuple t(n);
        for (std::size_t i = 0; i < n; ++i)
            t[i] = static_cast<std::size_t>(std::lower_bound(domains[i].begin(), domains[i].end(), row[i]) - domains[i].begin());
        weighted.emplace_back(std::move(t), p);
    }
    const DensityMatrix rho = encode_table(weighted, layout);

    json r;
    r["command"] = "entropy";
    r["spec_hash"] = spec_hash(spec_text);
    r["instance_hash"] = spec_hash(instance_text);
    r["query"] = to_string(q);
    r["fds"] = fds_json(var_fds);
    r["result_size"] = eval.result.size();
    r["full_result_size"] = eval.full.size();
    r["distribution"] = inst.weights ? "weights" : "uniform";
    std::size_t rmax = 0;
    for (const auto& a : q.body()) rmax = std::max(rmax, inst.db.find(a.relation)->tuples.size());
    r["rmax"] = rmax;
    if (auto s = s_of(eval, rmax)) r["s"] = *s;
    else r["s"] = nullptr;
    if (auto ratio = ratio_H1(q, dist)) r["ratio_h1"] = *ratio;
    else r["ratio_h1"] = nullptr;

    r["classical"] = vector_json(q, classical_entropy_vector(dist));
    json& quantum = r["quantum"];
    quantum = json::object();
    for (double alpha : options.alphas) {
        if (std::isnan(alpha) || alpha < 0) throw InputError("alpha values must be >= 0");
        quantum[format_alpha(alpha)] = vector_json(q, quantum_entropy_vector(rho, alpha));
    }

    json cond = json::array();
    for (const auto& fd : var_fds) {
        json c;
        c["fd"] = to_string(fd);
        c["table"] = table_fd_holds(eval.full, fd);
        c["spectral"] = fd_satisfied_spectral(rho, fd.lhs, fd.rhs);
        c["functional"] = fd_satisfied_functional(rho, fd.lhs, fd.rhs);
        json values = json::object();
        for (double alpha : options.alphas) values[format_alpha(alpha)] = conditional_renyi(rho, fd.lhs, fd.rhs, alpha);
        c["conditional_renyi"] = values;
        cond.push_back(c);
    }
    r["conditional"] = cond;

    json deco = json::object();
    SubsetIndex idx(n);
    for (std::size_t i = 1; i <= idx.count(); ++i) {
        const DensityMatrix reduced = reduce(rho, idx.subset(i));
        const Eigen::MatrixXcd a = reduced.dim() <= 4096 ? reduced.to_dense() : Eigen::MatrixXcd();
        const bool fixed = a.size() == 0 ? is_classical(reduced)
                                         : (decohere(reduced).to_dense() - a).cwiseAbs().maxCoeff() <= 1e-12;
        deco[subset_key(q.names_of(idx.subset(i)))] = fixed;
    }
    r["decoherence_fixed_point"] = deco;
    if (options.include_timing) r["timing_ms"] = elapsed_ms(start);
    return r;
}

// ---------------------------------------------------------------------------

std::string render_json(const json& report) { return rounded(report).dump(2) + "\n"; }

std::string render_text(const json& report) {
    std::string out;
    flatten(rounded(report), "", out);
    return out;
}

}  // namespace qbound
