// pairiv: estimation of direct and spillover treatment effects in two-person
// groups with imperfect take-up, plus an exact population oracle and a
// seeded simulator for checking the estimators against ground truth.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "pairiv/dataset.hpp"
#include "pairiv/dgp_io.hpp"
#include "pairiv/estimators.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/parallel.hpp"
#include "pairiv/report.hpp"
#include "pairiv/simulate.hpp"

namespace {

namespace fs = std::filesystem;
using pairiv::Error;
using pairiv::ErrorCode;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitIo = 3;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::IoError: return kExitIo;
        default: return kExitValidation;
    }
}

struct CommonFlags {
    std::string config_path;
    std::string input;
    std::string output;
    std::string spec_path;
    std::string truth_output;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int reps = 0;
    int workers = 0;  // 0 -> PAIRIV_WORKERS or hardware
    double ci_level = 0.95;
    bool clamp_shares = false;
    std::string design_probs_path;
    std::vector<std::string> estimands;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path,
                    "JSON file of flag values; the file wins on conflict");
    cmd->add_option("--workers", f.workers, "worker threads (default: PAIRIV_WORKERS or all)");
}

// Declarative run config: a JSON object keyed by long flag names. Values from
// the file override conflicting command-line values, with a warning.
void apply_config_file(const CLI::App* cmd, CommonFlags& f) {
    if (f.config_path.empty()) return;
    std::ifstream in(f.config_path);
    if (!in) throw Error(ErrorCode::IoError, "IoError", "cannot open " + f.config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    std::string("config file is not valid JSON: ") + e.what());
    }
    const auto warn_conflict = [&](const std::string& flag) {
        if (cmd->count("--" + flag) > 0) {
            std::cerr << "warning: --" << flag << " overridden by config file\n";
        }
    };
    const auto set_str = [&](const char* key, std::string& target) {
        if (j.contains(key)) {
            warn_conflict(key);
            target = j.at(key).get<std::string>();
        }
    };
    set_str("input", f.input);
    set_str("output", f.output);
    set_str("spec", f.spec_path);
    set_str("truth-output", f.truth_output);
    set_str("design-probs", f.design_probs_path);
    if (j.contains("seed")) {
        warn_conflict("seed");
        f.seed = j.at("seed").get<std::uint64_t>();
        f.seed_set = true;
    }
    if (j.contains("reps")) {
        warn_conflict("reps");
        f.reps = j.at("reps").get<int>();
    }
    if (j.contains("workers")) {
        warn_conflict("workers");
        f.workers = j.at("workers").get<int>();
    }
    if (j.contains("ci-level")) {
        warn_conflict("ci-level");
        f.ci_level = j.at("ci-level").get<double>();
    }
    if (j.contains("clamp-shares")) {
        warn_conflict("clamp-shares");
        f.clamp_shares = j.at("clamp-shares").get<bool>();
    }
    if (j.contains("estimands")) {
        warn_conflict("estimands");
        f.estimands = j.at("estimands").get<std::vector<std::string>>();
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "IoError", "cannot write " + path.string());
    out << text;
}

std::optional<std::vector<std::pair<std::string, pairiv::AssignmentDesign>>>
load_known_designs(const std::string& path) {
    if (path.empty()) return std::nullopt;
    const pairiv::ParsedDgp parsed = pairiv::dgp_from_file(path);
    std::vector<std::pair<std::string, pairiv::AssignmentDesign>> designs;
    for (const pairiv::StratumSpec& st : parsed.spec.strata) {
        designs.emplace_back(st.label, st.design);
    }
    return designs;
}

int run_estimate(const CommonFlags& f) {
    const pairiv::Dataset ds = pairiv::Dataset::load_csv_file(f.input);
    pairiv::EstimateOptions opts;
    opts.ci_level = f.ci_level;
    opts.clamp_shares = f.clamp_shares;
    opts.workers = pairiv::resolve_workers(f.workers);
    opts.estimand_filter = f.estimands;
    opts.known_design = load_known_designs(f.design_probs_path);
    const pairiv::EstimateReport report = pairiv::estimate_all(ds, opts);
    const std::string json = pairiv::report_to_json(report);
    if (f.output.empty()) {
        std::cout << json;
    } else {
        write_text_file(f.output, json);
        std::cout << pairiv::report_to_table(report);
    }
    return kExitOk;
}

int run_simulate(const CommonFlags& f) {
    pairiv::ParsedDgp parsed = pairiv::dgp_from_file(f.spec_path);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
    if (f.seed_set) {
        if (parsed.has_seed && parsed.spec.seed != f.seed) {
            std::cerr << "warning: --seed overridden by the spec file's seed\n";
        } else {
            parsed.spec.seed = f.seed;
        }
    } else if (!parsed.has_seed) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "simulate needs --seed or a seed in the spec file");
    }
    if (f.output.empty()) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "simulate needs --output");
    }
    const pairiv::Dataset ds = pairiv::simulate(parsed.spec, pairiv::resolve_workers(f.workers));
    ds.write_csv_file(f.output);

    fs::path truth_path = f.truth_output.empty()
                              ? fs::path(f.output).replace_extension(".truth.json")
                              : fs::path(f.truth_output);
    const pairiv::PopulationTruth tr = pairiv::truth(parsed.spec);
    write_text_file(truth_path, pairiv::truth_to_json(tr, parsed.spec));
    std::cout << "wrote " << ds.n_groups() << " households to " << f.output << "\n"
              << "wrote truth manifest to " << truth_path.string() << "\n";
    return kExitOk;
}

int run_verify(const CommonFlags& f) {
    const pairiv::ParsedDgp parsed = pairiv::dgp_from_file(f.spec_path);
    const pairiv::IdentityReport report = pairiv::verify_identities(parsed.spec);
    for (const pairiv::IdentityCheck& c : report.checks) {
        if (!c.applicable) {
            std::cout << "[  skip  ] " << c.name << " (" << c.note << ")\n";
        } else if (c.pass) {
            std::cout << "[  pass  ] " << c.name << " residual=" << c.residual << "\n";
        } else {
            std::cout << "[  FAIL  ] " << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs
                      << " residual=" << c.residual << "\n";
        }
    }
    std::cout << (report.all_pass ? "all identities pass" : "identity failures present")
              << " (max residual " << report.max_residual << ", " << report.n_applicable
              << " checks)\n";
    if (!f.output.empty()) {
        write_text_file(f.output, pairiv::identity_report_to_json(report));
    }
    return report.all_pass ? kExitOk : kExitCheckFailed;
}

int run_mc_study(const CommonFlags& f) {
    pairiv::ParsedDgp parsed = pairiv::dgp_from_file(f.spec_path);
    if (!f.seed_set) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "mc-study needs --seed");
    }
    pairiv::McOptions opts;
    opts.replications = f.reps;
    opts.seed = f.seed;
    opts.workers = pairiv::resolve_workers(f.workers);
    opts.ci_level = f.ci_level;
    opts.estimands = f.estimands;
    const pairiv::McReport report = pairiv::mc_study(parsed.spec, opts);
    const std::string json = pairiv::mc_report_to_json(report);
    if (f.output.empty()) {
        std::cout << json;
    } else {
        write_text_file(f.output, json);
    }
    return kExitOk;
}

int run_describe(const CommonFlags& f) {
    const pairiv::Dataset ds = pairiv::Dataset::load_csv_file(f.input);
    std::cout << "households: " << ds.n_groups() << "\n";
    std::cout << "unit observations: " << 2 * ds.n_groups() << "\n";
    std::cout << "assignment cells (unit perspective):";
    for (int c = 0; c < 4; ++c) {
        std::cout << " " << pairiv::zcell_label(c) << "=" << ds.cell_counts()[c];
    }
    std::cout << "\n";
    if (ds.has_strata()) {
        std::cout << "strata:";
        for (const std::string& s : ds.strata()) std::cout << " " << s;
        std::cout << "\n";
    } else {
        std::cout << "strata: none\n";
    }
    try {
        const pairiv::OsnDiagnostic diag = pairiv::check_osn(ds);
        std::cout << "one-sided noncompliance: "
                  << (diag.consistent ? "consistent" : "violated")
                  << " (d=1,z=0 count " << diag.hard_count << ")\n";
        std::cout << "  p_at=" << diag.p_at << " (se " << diag.se_at << ")\n";
        std::cout << "  p_sc=" << diag.p_sc << " (se " << diag.se_sc << ")\n";
    } catch (const Error& e) {
        std::cout << "one-sided noncompliance: unavailable (" << e.condition() << ")\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"direct and spillover effect estimation for paired experiments"};
    app.require_subcommand(1);

    CommonFlags f;

    CLI::App* estimate = app.add_subcommand("estimate", "estimate all effects from a dataset");
    estimate->add_option("--input", f.input, "dataset csv")->required();
    estimate->add_option("--output", f.output, "report json path (stdout when omitted)");
    estimate->add_option("--ci-level", f.ci_level, "confidence level (default 0.95)");
    estimate->add_flag("--clamp-shares", f.clamp_shares,
                       "clamp negative type shares and renormalize");
    estimate->add_option("--design-probs", f.design_probs_path,
                         "spec file with known per-stratum assignment designs");
    estimate->add_option("--estimands", f.estimands,
                         "comma separated estimand names ('*' suffix for prefixes)")
        ->delimiter(',');
    add_common_flags(estimate, f);

    CLI::App* simulate = app.add_subcommand("simulate", "draw a dataset from a process spec");
    simulate->add_option("--spec", f.spec_path, "DGP spec json")->required();
    simulate->add_option("--output", f.output, "dataset csv path")->required();
    simulate->add_option("--truth-output", f.truth_output,
                         "truth manifest path (default: output with .truth.json)");
    auto* seed_opt = simulate->add_option("--seed", f.seed, "RNG seed");
    add_common_flags(simulate, f);

    CLI::App* verify = app.add_subcommand("verify", "check the decomposition identities");
    verify->add_option("--spec", f.spec_path, "DGP spec json")->required();
    verify->add_option("--output", f.output, "identity report json path");
    add_common_flags(verify, f);

    CLI::App* mc = app.add_subcommand("mc-study", "Monte Carlo calibration study");
    mc->add_option("--spec", f.spec_path, "DGP spec json")->required();
    mc->add_option("--reps", f.reps, "replications")->required();
    auto* mc_seed_opt = mc->add_option("--seed", f.seed, "RNG seed");
    mc->add_option("--output", f.output, "calibration json path (stdout when omitted)");
    mc->add_option("--ci-level", f.ci_level, "confidence level (default 0.95)");
    mc->add_option("--estimands", f.estimands, "estimand names")->delimiter(',');
    add_common_flags(mc, f);

    CLI::App* describe = app.add_subcommand("describe", "dataset summary and diagnostics");
    describe->add_option("--input", f.input, "dataset csv")->required();
    add_common_flags(describe, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        f.seed_set = (seed_opt->count() > 0) || (mc_seed_opt->count() > 0);
        apply_config_file(cmd, f);
        if (cmd == estimate) return run_estimate(f);
        if (cmd == simulate) return run_simulate(f);
        if (cmd == verify) return run_verify(f);
        if (cmd == mc) return run_mc_study(f);
        if (cmd == describe) return run_describe(f);
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
