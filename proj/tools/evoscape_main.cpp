#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <evoscape/experiment.hpp>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string profile = "desk";
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Experiment config file (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--profile", flags.profile, "Hyperparameter preset")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", flags.seed, "Override the global seed");
    cmd->add_option("--jobs", flags.jobs, "Worker threads (runs execute in parallel)");
    cmd->add_option("--out", flags.out_dir, "Output directory");
}

evoscape::ExperimentConfig build_config(const CommonFlags& flags) {
    evoscape::ExperimentConfig cfg =
        flags.config_path.empty() ? evoscape::ExperimentConfig::with_profile(flags.profile)
                                  : evoscape::ExperimentConfig::load(flags.config_path, flags.profile);
    if (flags.seed)
        cfg.global_seed = *flags.seed;
    if (flags.jobs)
        cfg.parallelism = *flags.jobs;
    if (flags.out_dir)
        cfg.output_dir = *flags.out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavior-landscape walks, evolvability metrics, and Markov niche analysis"};
    app.require_subcommand(1);

    CommonFlags pressure_flags, metric_flags, markov_flags, dissimila_flags;

    CLI::App* pressure = app.add_subcommand(
        "pressure-sweep", "Walk batches across evolutionary-pressure levels, Spearman summary");
    add_common(pressure, pressure_flags);

    CLI::App* metric = app.add_subcommand(
        "metric-comparison", "Walk batches across diversity metrics, Kruskal-Wallis summary");
    add_common(metric, metric_flags);

    CLI::App* markov = app.add_subcommand(
        "markov-estimate", "Estimate the niche transition matrix and l-evolvability table");
    add_common(markov, markov_flags);

    CLI::App* dissimila = app.add_subcommand(
        "dissimila-scan", "Rank sampled genotypes by the r* evolvability/sensitivity ratio");
    add_common(dissimila, dissimila_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pressure->parsed()) {
            const auto outcome = evoscape::cmd_pressure_sweep(build_config(pressure_flags));
            std::cout << "pressure-sweep: spearman rho = " << outcome.final_step.rho
                      << ", p = " << outcome.final_step.p << "\n"
                      << "wrote " << outcome.csv_path.string() << "\n"
                      << "wrote " << outcome.json_path.string() << "\n";
        } else if (metric->parsed()) {
            const auto outcome = evoscape::cmd_metric_comparison(build_config(metric_flags));
            std::cout << "metric-comparison: kruskal H = " << outcome.final_step.h
                      << ", p = " << outcome.final_step.p << "\n"
                      << "wrote " << outcome.csv_path.string() << "\n"
                      << "wrote " << outcome.json_path.string() << "\n";
        } else if (markov->parsed()) {
            const auto outcome = evoscape::cmd_markov_estimate(build_config(markov_flags));
            if (outcome.transition.degenerate)
                std::cerr << "warning: fewer than 2 niches discovered; the landscape looks degenerate\n";
            std::cout << "markov-estimate: " << outcome.transition.n() << " niches, "
                      << outcome.genotype_estimates.size() << " genotype rows, "
                      << outcome.niche_estimates.size() << " niche rows\n"
                      << "wrote " << outcome.matrix_path.string() << "\n"
                      << "wrote " << outcome.table_path.string() << "\n";
        } else if (dissimila->parsed()) {
            const auto outcome = evoscape::cmd_dissimila_scan(build_config(dissimila_flags));
            std::cout << "dissimila-scan: " << outcome.rows.size() << " genotypes ranked by r*\n"
                      << "wrote " << outcome.csv_path.string() << "\n";
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
