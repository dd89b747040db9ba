// qbound: worst-case output size bounds for conjunctive queries.
//
//   qbound solve   SPEC [--bound agm|agm-dual|polymatroid|renyi] [--poly-mode literal|elemental]
//                       [--export-lp PATH] [--rmax N] [--per-relation-caps] [--json]
//   qbound verify  SPEC [--domain-size K] [--budget N] [--seed S] [--samples N] [--json]
//   qbound entropy SPEC --instance FILE [--alpha LIST] [--json]
//
// Exit codes: 0 success, 1 input error, 2 solver failure, 3 invariant violation.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "qbound/quantum.hpp"
#include "qbound/report.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qbound::InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const nlohmann::json& report, bool as_json) {
    std::cout << (as_json ? qbound::render_json(report) : qbound::render_text(report));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Worst-case output size bounds for conjunctive queries with functional dependencies"};
    app.require_subcommand(1);

    std::string spec_path;
    bool as_json = false;
    bool timing = false;

    auto* solve = app.add_subcommand("solve", "Build and solve a bound program");
    std::string bound = "polymatroid", poly_mode = "elemental", export_path;
    std::optional<double> rmax;
    bool per_relation = false;
    solve->add_option("spec", spec_path, "Query spec file")->required();
    solve->add_option("--bound", bound, "Bound program")
        ->check(CLI::IsMember({"agm", "agm-dual", "polymatroid", "renyi"}));
    solve->add_option("--poly-mode", poly_mode, "Polymatroid monotonicity family")
        ->check(CLI::IsMember({"literal", "elemental"}));
    solve->add_option("--export-lp", export_path, "Write the program in CPLEX LP format");
    solve->add_option("--rmax", rmax, "Largest relation size, for the concrete bound")->check(CLI::PositiveNumber);
    solve->add_flag("--per-relation-caps", per_relation, "Cap h(u_j) by log|R_j|/log rmax instead of 1");
    solve->add_flag("--json", as_json, "JSON output");
    solve->add_flag("--timing", timing, "Include wall-clock timing");

    auto* verify = app.add_subcommand("verify", "Search small databases and sample distributions against the bounds");
    qbound::VerifyOptions vopt;
    verify->add_option("spec", spec_path, "Query spec file")->required();
    verify->add_option("--domain-size", vopt.search.domain_size, "Values per attribute")->check(CLI::Range(2, 64));
    verify->add_option("--budget", vopt.search.budget, "Search budget (10 restarts per unit)")->check(CLI::PositiveNumber);
    verify->add_option("--seed", vopt.search.seed, "Random seed");
    verify->add_option("--samples", vopt.samples, "Sampled distributions for the H1 ratio");
    verify->add_flag("--json", as_json, "JSON output");
    verify->add_flag("--timing", timing, "Include wall-clock timing");

    auto* entropy = app.add_subcommand("entropy", "Entropies of the density-matrix encoding of a query result");
    std::string instance_path;
    std::vector<std::string> alpha_list;
    entropy->add_option("spec", spec_path, "Query spec file")->required();
    entropy->add_option("--instance", instance_path, "Instance file")->required();
    entropy->add_option("--alpha", alpha_list, "Renyi orders (comma separated; 'inf' allowed)")->delimiter(',');
    entropy->add_flag("--json", as_json, "JSON output");
    entropy->add_flag("--timing", timing, "Include wall-clock timing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::string spec_text = read_file(spec_path);
        if (solve->parsed()) {
            qbound::SolveOptions opt;
            opt.kind = bound == "agm"        ? qbound::BoundKind::agm()
                       : bound == "agm-dual" ? qbound::BoundKind::agm_dual()
                       : bound == "renyi"    ? qbound::BoundKind::renyi()
                                             : qbound::BoundKind::polymatroid(poly_mode == "literal"
                                                                                  ? qbound::PolymatroidMode::paper_literal
                                                                                  : qbound::PolymatroidMode::elemental);
            opt.rmax = rmax;
            opt.per_relation_caps = per_relation;
            opt.include_timing = timing;
            auto out = qbound::solve_report(spec_text, opt);
            if (!export_path.empty()) {
                std::ofstream f(export_path);
                if (!f || !(f << out.lp_text)) throw qbound::InputError("cannot write " + export_path);
            }
            emit(out.report, as_json);
        } else if (verify->parsed()) {
            vopt.include_timing = timing;
            auto report = qbound::verify_report(spec_text, vopt);
            emit(report, as_json);
            if (!report["sound"].get<bool>()) {
                std::cerr << "error: a sampled instance exceeds a computed bound\n";
                return 3;
            }
        } else if (entropy->parsed()) {
            qbound::EntropyOptions eopt;
            eopt.include_timing = timing;
            if (!alpha_list.empty()) {
                eopt.alphas.clear();
                for (const auto& a : alpha_list) {
                    try {
                        std::size_t used = 0;
                        const double v = a == "inf" ? qbound::kInfiniteOrder : std::stod(a, &used);
                        if (a != "inf" && used != a.size()) throw std::invalid_argument(a);
                        eopt.alphas.push_back(v);
                    } catch (const std::exception&) {
                        throw qbound::InputError("invalid alpha '" + a + "'");
                    }
                }
            }
            emit(qbound::entropy_report(spec_text, read_file(instance_path), eopt), as_json);
        }
    } catch (const qbound::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qbound::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const qbound::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
