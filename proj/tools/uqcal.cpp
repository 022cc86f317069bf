// uqcal: eligibility-set calibration, reliability bounds and robust design
// from output-only data. Subcommands map to the pipeline stages; see the
// README for file formats and the external-model protocol.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "uqcal/uqcal.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

uqcal::RunConfig build_config(const GlobalArgs& g) {
    uqcal::RunConfig cfg;
    if (!g.config_path.empty()) cfg = uqcal::load_config(g.config_path);
    for (const auto& kv : g.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw uqcal::invalid_input("--set expects key=value, got '" + kv + "'");
        uqcal::config_set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.seed = *g.seed;
    if (g.jobs) cfg.jobs = *g.jobs;
    cfg.validate();
    return cfg;
}

void add_global_flags(CLI::App* cmd, GlobalArgs& g) {
    cmd->add_option("--config", g.config_path, "key = value config file");
    cmd->add_option("--set", g.sets, "override a config key (key=value, repeatable)");
    cmd->add_option("--seed", g.seed, "master seed (overrides config)");
    cmd->add_option("--jobs", g.jobs, "worker threads for per-e solves");
    cmd->add_option("--output", g.output_dir, "output directory (default .)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRO eligibility-set calibration toolkit"};
    app.require_subcommand(1);

    GlobalArgs g;
    std::string data_file, records_file;

    auto* summarize = app.add_subcommand("summarize", "spectral summaries of a data file");
    summarize->add_option("data", data_file, "time-series CSV (dt, y0..yT per row)")->required();
    add_global_flags(summarize, g);

    auto* eligibility =
        app.add_subcommand("eligibility", "construct the eligibility set");
    eligibility->add_option("data", data_file, "time-series CSV")->required();
    add_global_flags(eligibility, g);

    auto* reliability =
        app.add_subcommand("reliability", "failure-probability ranges and severities");
    reliability->add_option("data", data_file, "time-series CSV")->required();
    reliability->add_option("records", records_file, "records.csv from `eligibility`")->required();
    add_global_flags(reliability, g);

    auto* design = app.add_subcommand("design", "Kiefer-Wolfowitz robust design descent");
    design->add_option("data", data_file, "time-series CSV")->required();
    design->add_option("records", records_file, "records.csv from `eligibility`")->required();
    add_global_flags(design, g);

    auto* study = app.add_subcommand("n1-study", "data-size impact subsampling study");
    study->add_option("data", data_file, "time-series CSV")->required();
    add_global_flags(study, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const uqcal::RunConfig cfg = build_config(g);
        if (summarize->parsed()) uqcal::cli::cmd_summarize(data_file, cfg, g.output_dir);
        else if (eligibility->parsed()) uqcal::cli::cmd_eligibility(data_file, cfg, g.output_dir);
        else if (reliability->parsed())
            uqcal::cli::cmd_reliability(data_file, records_file, cfg, g.output_dir);
        else if (design->parsed()) uqcal::cli::cmd_design(data_file, records_file, cfg, g.output_dir);
        else if (study->parsed()) uqcal::cli::cmd_n1_study(data_file, cfg, g.output_dir);
        return 0;
    } catch (const uqcal::invalid_input& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const uqcal::empty_set_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const uqcal::model_error& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 3;
    } catch (const uqcal::solver_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
