#include "ixmm/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kOther = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kInvalidRun = 4;

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config, "JSON config file (defaults when omitted)");
    cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "overrides sim.seed");
    cmd->add_option("--threads", opt.threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market maker with an internal exchange: HJBQVI solver and Monte Carlo experiments"};
    app.require_subcommand(1, 1);

    Options opt;
    auto* solve = app.add_subcommand("solve", "solve the value function for the configured scenario");
    auto* figures = app.add_subcommand("figures", "depth tables and execution boundaries");
    auto* tables = app.add_subcommand("tables", "P&L and fill-time tables");
    auto* sweep = app.add_subcommand("sweep", "fee and margin sweeps");
    for (auto* cmd : {solve, figures, tables, sweep}) add_common(cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        ixmm::ExperimentConfig config = opt.config.empty() ? ixmm::ExperimentConfig{} : ixmm::load_config(opt.config);
        if (opt.seed) config.sim.seed = *opt.seed;
        config.sim.threads = opt.threads;
        config.validate();

        ixmm::CommandResult result;
        if (solve->parsed()) result = ixmm::cmd_solve(config, opt.out);
        else if (figures->parsed()) result = ixmm::cmd_figures(config, opt.out);
        else if (tables->parsed()) result = ixmm::cmd_tables(config, opt.out);
        else result = ixmm::cmd_sweep(config, opt.out);

        std::cout << "config_hash " << ixmm::config_hash(config) << '\n';
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        if (!result.valid) {
            std::cerr << "run invalid: inventory left the solver grid on some path\n";
            return kInvalidRun;
        }
        return kOk;
    } catch (const ixmm::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const ixmm::NumericalError& e) {
        std::cerr << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
}
