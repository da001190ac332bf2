// Command-line driver for the skew heat-equation toolkit.
//
//   skewheat <kernel-selftest|simulate|quartic|convergence|estimate>
//            [--config PATH] [--seed U64] [--replicates N] [--workers N]
//            [--out DIR] [--backend convolution|exact-linear] [--timing]
//
// Exit codes: 0 success, 1 check or run failure, 2 configuration error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skewheat/harness/config.hpp"
#include "skewheat/harness/experiments.hpp"
#include "skewheat/harness/output.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> workers;
    std::optional<std::string> out;
    std::optional<std::string> backend;
    bool timing = false;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config_path, "experiment config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--replicates", o.replicates, "Monte Carlo replicates R");
    sub->add_option("--workers", o.workers, "worker threads");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--backend", o.backend, "convolution or exact-linear")
        ->check(CLI::IsMember({"convolution", "exact-linear"}));
    sub->add_flag("--timing", o.timing, "record wall time (outputs are then not bit-reproducible)");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace skewheat::harness;

    CLI::App app{"Simulation and inference for the stochastic heat equation in a two-material medium"};
    app.require_subcommand(1);
    Overrides o;
    for (const auto& kind : experiment_kinds()) add_common(app.add_subcommand(kind, kind + " experiment"), o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string kind = app.get_subcommands().front()->get_name();

    ExperimentConfig config;
    try {
        if (!o.config_path.empty()) config = load_config(o.config_path);
        if (o.seed) config.seed = *o.seed;
        if (o.replicates) {
            if (*o.replicates == 0) throw ConfigError("--replicates must be at least 1");
            config.replicates = *o.replicates;
        }
        if (o.workers) config.workers = *o.workers;
        if (o.out) config.out_dir = *o.out;
        if (o.backend) config.backend = parse_backend(*o.backend);
        config = resolve(config, kind);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const RunOptions options{o.timing};
    try {
        const RunResult result = run_experiment(config, options);
        write_outputs(config, result, options);
        for (const auto& c : result.checks) {
            std::cout << (c.diagnostic ? "[diag] " : (c.passed ? "[pass] " : "[FAIL] ")) << c.name << " = "
                      << csv_number(c.value) << (c.diagnostic ? "" : " (threshold " + csv_number(c.threshold) + ")")
                      << "\n";
        }
        std::cout << "wrote " << result.rows.size() << " rows to " << config.out_dir << "/" << config.kind
                  << ".csv\n";
        return result.passed() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}
