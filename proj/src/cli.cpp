#include "wigner/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wigner/config.hpp"
#include "wigner/experiment.hpp"
#include "wigner/output.hpp"
#include "wigner/perspectives.hpp"
#include "wigner/reasoning.hpp"

namespace wigner::cli {

namespace ex = wigner::experiment;
namespace pv = wigner::perspectives;
namespace rs = wigner::reasoning;

namespace {

constexpr int kOk = 0;
constexpr int kInternalError = 1;
constexpr int kUsageError = 2;
constexpr int kValidationError = 3;

struct CommonOptions {
    std::string config_path;
    bool use_default = false;
    std::string format = "json";
    bool stamp = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path,
                    "Path to a protocol config file (JSON)");
    cmd->add_flag("--default", opts.use_default,
                  "Use the built-in default protocol values");
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "markdown"}))
        ->capture_default_str();
    cmd->add_flag("--stamp", opts.stamp,
                  "Include a generation timestamp in metadata");
}

config::ProtocolConfig resolve_config(const CommonOptions& opts) {
    if (!opts.config_path.empty() && !opts.use_default)
        return config::load_file(opts.config_path);
    return config::ProtocolConfig::paper_default();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("FRIENDLY_WIGNER_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw config::ValidationError("FRIENDLY_WIGNER_SEED",
                                          "not an unsigned integer");
        }
    }
    return 0;
}

int emit(const output::Json& doc, const std::string& format, std::ostream& out) {
    if (format == "json")
        out << output::render_json(doc);
    else if (format == "markdown")
        out << output::render_markdown(doc);
    else
        out << output::render_csv(doc);
    return kOk;
}

pv::Conditioning parse_conditions(const std::vector<std::string>& items,
                                  std::ostream& err, bool& ok) {
    pv::Conditioning cond;
    ok = true;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            err << "error: condition '" << item << "' is not key=value\n";
            ok = false;
            return cond;
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "wbar")
            cond.wbar = value;
        else if (key == "w")
            cond.w = value;
        else if (key == "z")
            cond.z = value;
        else if (key == "hyp")
            cond.lbar_hypothesis = value;
        else {
            err << "error: unknown condition key '" << key
                << "' (expected wbar, w, z or hyp)\n";
            ok = false;
            return cond;
        }
    }
    return cond;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Four-agent gedankenexperiment simulator and deduction checker"};
    app.require_subcommand(1);

    CommonOptions exact_opts;
    auto* exact_cmd =
        app.add_subcommand("exact", "Exact evolution and joint outcome table");
    add_common(exact_cmd, exact_opts);

    CommonOptions sim_opts;
    std::uint64_t rounds = 0;
    std::optional<std::uint64_t> seed_flag;
    unsigned workers = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "Seeded Monte Carlo rounds");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--rounds", rounds, "Number of rounds (>= 1)")
        ->required();
    sim_cmd->add_option("--seed", seed_flag,
                        "RNG seed (falls back to FRIENDLY_WIGNER_SEED, then 0)");
    sim_cmd->add_option("--workers", workers, "Worker thread count")
        ->capture_default_str();

    CommonOptions persp_opts;
    std::string agent_arg, time_arg;
    std::vector<std::string> condition_args;
    auto* persp_cmd = app.add_subcommand(
        "perspectives", "Agent state assignments at a time point");
    add_common(persp_cmd, persp_opts);
    persp_cmd->add_option("--agent", agent_arg, "FBAR | F | WBAR | W")->required();
    persp_cmd->add_option("--time", time_arg, "t1 | t2 | t3")->required();
    persp_cmd
        ->add_option("--condition", condition_args,
                     "Conditioning key=value (wbar=, w=, z=, hyp=); repeatable")
        ->take_all();

    CommonOptions reason_opts;
    std::string pathway_arg;
    bool all_pathways = false;
    auto* reason_cmd =
        app.add_subcommand("reason", "Deduction pathway verdicts");
    add_common(reason_cmd, reason_opts);
    reason_cmd->add_option("--pathway", pathway_arg,
                           "One pathway, e.g. WBAR:t3,F:t2,FBAR:t1");
    reason_cmd->add_flag("--all", all_pathways, "Evaluate all nine pathways");

    CommonOptions report_opts;
    auto* report_cmd = app.add_subcommand(
        "report", "Full consistency report (exact + chain + verdicts)");
    add_common(report_cmd, report_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        if (exact_cmd->parsed()) {
            const ex::Protocol protocol(resolve_config(exact_opts));
            return emit(output::exact_document(protocol, exact_opts.stamp),
                        exact_opts.format, out);
        }

        if (sim_cmd->parsed()) {
            if (rounds == 0) {
                err << "usage error: --rounds must be >= 1\n";
                return kUsageError;
            }
            if (workers == 0) {
                err << "usage error: --workers must be >= 1\n";
                return kUsageError;
            }
            const ex::Protocol protocol(resolve_config(sim_opts));
            const std::uint64_t seed = resolve_seed(seed_flag);
            const auto table = ex::monte_carlo(protocol, rounds, seed, workers);
            return emit(output::simulate_document(protocol, table, sim_opts.stamp),
                        sim_opts.format, out);
        }

        if (persp_cmd->parsed()) {
            bool cond_ok = true;
            const pv::Conditioning cond =
                parse_conditions(condition_args, err, cond_ok);
            if (!cond_ok) return kUsageError;
            pv::Agent agent;
            ex::TimePoint time;
            try {
                agent = pv::agent_from_string(agent_arg);
                time = ex::timepoint_from_string(time_arg);
            } catch (const std::exception& e) {
                err << "usage error: " << e.what() << "\n";
                return kUsageError;
            }
            const ex::Protocol protocol(resolve_config(persp_opts));
            return emit(output::perspectives_document(protocol, agent, time, cond,
                                                      persp_opts.stamp),
                        persp_opts.format, out);
        }

        if (reason_cmd->parsed()) {
            const ex::Protocol protocol(resolve_config(reason_opts));
            std::vector<rs::Verdict> verdicts;
            if (!pathway_arg.empty()) {
                const auto p = rs::parse_pathway(pathway_arg);
                if (!p) {
                    err << "usage error: unknown pathway '" << pathway_arg
                        << "'. Valid pathways:\n";
                    for (const auto& q : rs::enumerate_pathways())
                        err << "  " << q.to_string() << "\n";
                    return kUsageError;
                }
                verdicts.push_back(rs::evaluate_pathway(protocol, *p));
            } else {
                // --all is the default behavior.
                for (const auto& p : rs::enumerate_pathways())
                    verdicts.push_back(rs::evaluate_pathway(protocol, p));
            }
            return emit(output::reason_document(protocol, verdicts,
                                                reason_opts.stamp),
                        reason_opts.format, out);
        }

        if (report_cmd->parsed()) {
            const ex::Protocol protocol(resolve_config(report_opts));
            const auto report = rs::consistency_report(protocol);
            return emit(output::report_document(protocol, report,
                                                report_opts.stamp),
                        report_opts.format, out);
        }

        err << "usage error: no subcommand given\n";
        return kUsageError;
    } catch (const config::ParseError& e) {
        err << "config error: " << e.what() << "\n";
        return kValidationError;
    } catch (const config::ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kValidationError;
    } catch (const pv::NotModeledError& e) {
        err << "not modeled: " << e.what() << "\n";
        return kValidationError;
    } catch (const ex::InvalidArgumentError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

} // namespace wigner::cli
