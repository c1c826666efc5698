#include "quditls/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace quditls;

int main(int argc, char** argv) {
    CLI::App app{"quditls: two-qudit light-shift gate simulator for trapped ions"};
    app.require_subcommand(1);
    app.footer(config::config_grammar());

    std::string config_path, out_dir, format, certify_input;
    std::int64_t seed = -1, samples = -1, shots = -1;
    int dimension = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "json|csv|both");
        sub->add_option("--samples", samples, "override Monte Carlo sample count");
        sub->add_option("--dimension", dimension, "override qudit dimension")
            ->check(CLI::Range(2, 5));
        sub->add_option("--shots", shots, "override shots per measurement setting");
    };

    CLI::App* sim = app.add_subcommand("simulate", "run the gate-decay pipeline");
    CLI::App* cal = app.add_subcommand("calibrate-spacing", "scan the ion-spacing phase");
    CLI::App* sol = app.add_subcommand("solve-params", "solve pulse parameters for G(theta)");
    CLI::App* bud = app.add_subcommand("budget", "per-source error budget table");
    CLI::App* cer = app.add_subcommand("certify", "entanglement certification from data");
    for (auto* sub : {sim, cal, sol, bud, cer}) add_common(sub);
    cer->add_option("--input", certify_input, "measured-data or report JSON file");

    CLI11_PARSE(app, argc, argv);

    config::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = config::parse_config_file(config_path);
        if (seed >= 0) cfg.seed = std::uint64_t(seed);
        if (samples > 0) cfg.noise.n_samples = int(samples);
        if (shots >= 0) cfg.shots = shots;
        if (dimension > 0) cfg.dimension = dimension;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!format.empty()) {
            if (format != "json" && format != "csv" && format != "both")
                throw config::ConfigError("format must be json|csv|both");
            cfg.format = format;
        }
        if (!certify_input.empty()) cfg.certify_input = certify_input;
    } catch (const std::exception& e) {
        std::cerr << report::error_record(runner::kConfigError, "config", e.what());
        return runner::kConfigError;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    return runner::run_command(verb, cfg);
}
