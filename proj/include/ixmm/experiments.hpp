#pragma once

#include "ixmm/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ixmm {

// Everything an experiment command needs. Defaults reproduce the calibrated
// setup: the three-size market, T = 300 s, dt = 0.01 s for the solver,
// 5,000 paths at 0.3 s for the simulator, margin 0.1.
struct ExperimentConfig {
    MarketParams market = paper_market_params();
    Scenario scenario = Scenario::Iceberg;
    double rho_tilde = 0.0;
    double xi = 0.0;
    double iota = 0.1;
    std::vector<double> rho_grid{-0.2, 0.0, 0.2};
    std::vector<double> boundary_rho_grid{-0.2, -0.15, -0.1, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2};
    std::vector<double> fee_grid{0.0, 0.05, 0.1, 0.15, 0.2};
    std::vector<double> margin_grid{0.0, 0.05, 0.1, 0.15, 0.2};
    SolverSettings solver;
    SimConfig sim;

    void validate() const;  // throws ConfigError
};

// Parses the JSON config text. Every key is optional; unknown keys, wrong
// types and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical JSON of the resolved config (threads excluded).
std::string canonical_config(const ExperimentConfig& config);

// FNV-1a 64 of the canonical config, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Directory component for an offset, e.g. "-0.2", "0", "0.15".
std::string format_offset(double value);

struct CommandResult {
    std::vector<std::filesystem::path> files;
    bool valid = true;  // false when any simulation clamped inventory
};

// <out>/solve/<scenario>/<rho>/<hash>.bin (surface) and <hash>.json (metadata).
CommandResult cmd_solve(const ExperimentConfig& config, const std::filesystem::path& out);

// Depth-vs-q tables per scenario and the reference, plus the execution
// boundary versus client offset for Iceberg and TWAP.
CommandResult cmd_figures(const ExperimentConfig& config, const std::filesystem::path& out);

// P&L and first-fill-time tables: 3 scenarios x rho_grid x {optimal, naive}.
CommandResult cmd_tables(const ExperimentConfig& config, const std::filesystem::path& out);

// Fee and margin sweeps for the configured scenario.
CommandResult cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out);

}  // namespace ixmm
