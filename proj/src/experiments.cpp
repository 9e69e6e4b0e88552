#include "ixmm/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>

namespace ixmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError("config: unknown key '" + where + "." + item.key() + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

void read_market(const json& j, MarketParams& m) {
    check_keys(j, {"sigma", "sizes", "lambda_bid", "lambda_ask", "kappa", "alpha", "phi", "psi", "horizon"},
               "market");
    read(j, "sigma", m.sigma);
    read(j, "alpha", m.alpha);
    read(j, "phi", m.phi);
    read(j, "psi", m.psi);
    read(j, "horizon", m.horizon);

    std::vector<int> sizes = m.size_list();
    std::vector<double> lb, la, kappa;
    for (const auto& s : m.sizes) {
        lb.push_back(s.lambda_bid);
        la.push_back(s.lambda_ask);
        kappa.push_back(s.kappa);
    }
    read(j, "sizes", sizes);
    read(j, "lambda_bid", lb);
    read(j, "lambda_ask", la);
    read(j, "kappa", kappa);
    if (lb.size() != sizes.size() || la.size() != sizes.size() || kappa.size() != sizes.size())
        throw ConfigError("config: market size arrays must all have the same length");
    m.sizes.clear();
    for (std::size_t k = 0; k < sizes.size(); ++k) m.sizes.push_back({sizes[k], lb[k], la[k], kappa[k]});
}

json market_json(const MarketParams& m) {
    json lb = json::array(), la = json::array(), kappa = json::array(), sizes = json::array();
    for (const auto& s : m.sizes) {
        sizes.push_back(s.size);
        lb.push_back(s.lambda_bid);
        la.push_back(s.lambda_ask);
        kappa.push_back(s.kappa);
    }
    return {{"sigma", m.sigma}, {"sizes", sizes}, {"lambda_bid", lb}, {"lambda_ask", la},
            {"kappa", kappa},   {"alpha", m.alpha}, {"phi", m.phi},   {"psi", m.psi},
            {"horizon", m.horizon}};
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

// First line of every CSV: provenance and units.
std::ofstream open_csv(const fs::path& path, const std::string& command, const std::string& hash,
                       const std::string& units) {
    auto out = open_output(path);
    out << "# ixmm " << command << " config_hash=" << hash << " units: " << units << '\n';
    return out;
}

const std::vector<Scenario> kScenarios{Scenario::Iceberg, Scenario::TWAP, Scenario::FullAmount};

void write_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) out << *v;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        market.validate();
        InternalOrderParams probe = scenario_preset(scenario, rho_tilde, xi);
        probe.validate();
        BenchmarkConfig{iota, rho_tilde}.validate();
        sim.validate(market);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (rho_grid.empty() || boundary_rho_grid.empty() || fee_grid.empty() || margin_grid.empty())
        throw ConfigError("config: grids must be non-empty");
    for (double f : fee_grid)
        if (!(f >= 0.0)) throw ConfigError("config: fees must be >= 0");
    for (double m : margin_grid)
        if (!(m >= 0.0)) throw ConfigError("config: margins must be >= 0");
    if (std::abs(sim.horizon - market.horizon) > 1e-12 * market.horizon)
        throw ConfigError("config: simulation horizon must equal the market horizon");
    if (!(solver.dt > 0.0) || !(solver.q_min < 0 && solver.q_max > 0))
        throw ConfigError("config: solver needs dt > 0 and q_min < 0 < q_max");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    try {
        const json j = json::parse(text);
        check_keys(j, {"market", "scenario", "rho_tilde", "xi", "iota", "rho_grid", "boundary_rho_grid",
                       "fee_grid", "margin_grid", "solver", "sim"},
                   "<root>");
        if (j.contains("market")) read_market(j.at("market"), c.market);
        if (j.contains("scenario")) {
            try {
                c.scenario = parse_scenario(j.at("scenario").get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: ") + e.what());
            }
        }
        read(j, "rho_tilde", c.rho_tilde);
        read(j, "xi", c.xi);
        read(j, "iota", c.iota);
        read(j, "rho_grid", c.rho_grid);
        read(j, "boundary_rho_grid", c.boundary_rho_grid);
        read(j, "fee_grid", c.fee_grid);
        read(j, "margin_grid", c.margin_grid);
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            check_keys(s, {"dt", "q_min", "q_max"}, "solver");
            read(s, "dt", c.solver.dt);
            read(s, "q_min", c.solver.q_min);
            read(s, "q_max", c.solver.q_max);
        }
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            check_keys(s, {"dt", "n_paths", "seed", "q0", "x0", "s0", "report_scale"}, "sim");
            read(s, "dt", c.sim.dt);
            read(s, "n_paths", c.sim.n_paths);
            read(s, "seed", c.sim.seed);
            read(s, "q0", c.sim.q0);
            read(s, "x0", c.sim.x0);
            read(s, "s0", c.sim.s0);
            read(s, "report_scale", c.sim.report_scale);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.sim.horizon = c.market.horizon;
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string canonical_config(const ExperimentConfig& c) {
    const json j = {
        {"market", market_json(c.market)},
        {"scenario", std::string(to_string(c.scenario))},
        {"rho_tilde", c.rho_tilde},
        {"xi", c.xi},
        {"iota", c.iota},
        {"rho_grid", c.rho_grid},
        {"boundary_rho_grid", c.boundary_rho_grid},
        {"fee_grid", c.fee_grid},
        {"margin_grid", c.margin_grid},
        {"solver", {{"dt", c.solver.dt}, {"q_min", c.solver.q_min}, {"q_max", c.solver.q_max}}},
        {"sim",
         {{"dt", c.sim.dt},
          {"n_paths", c.sim.n_paths},
          {"seed", c.sim.seed},
          {"q0", c.sim.q0},
          {"x0", c.sim.x0},
          {"s0", c.sim.s0},
          {"report_scale", c.sim.report_scale}}},
    };
    return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : canonical_config(config)) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string format_offset(double value) {
    if (value == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", value);
    return buf;
}

// ---------------------------------------------------------------------------

CommandResult cmd_solve(const ExperimentConfig& config, const fs::path& out) {
    config.validate();
    const auto hash = config_hash(config);
    const auto internal = scenario_preset(config.scenario, config.rho_tilde, config.xi);
    const auto model = solve(config.market, internal, config.solver);
    const double residual = qvi_residual(model.surface);

    const fs::path dir = out / "solve" / std::string(to_string(config.scenario)) / format_offset(config.rho_tilde);
    fs::create_directories(dir);
    CommandResult result;

    const auto bin = dir / (hash + ".bin");
    write_surface_binary(model.surface, bin);
    result.files.push_back(bin);

    const auto& g = model.surface.grid();
    json boundary = json::object();
    for (int l = 1; l <= g.lbar; ++l) {
        const auto b = model.region.boundary(0, l);
        boundary[std::to_string(l)] = b ? json(*b) : json(nullptr);
    }
    const json meta = {
        {"config_hash", hash},
        {"scenario", std::string(to_string(config.scenario))},
        {"rho_tilde", config.rho_tilde},
        {"xi", config.xi},
        {"effective_offset", effective_offset(internal)},
        {"dt", g.dt},
        {"n_t", g.n_t},
        {"q_min", g.q_min},
        {"q_max", g.q_max},
        {"lbar", g.lbar},
        {"qvi_residual", residual},
        {"h_0_0_lbar", model.surface.h(0, 0, g.lbar)},
        {"boundary_t0", boundary},
        {"surface_file", bin.filename().string()},
    };
    const auto meta_path = dir / (hash + ".json");
    auto meta_out = open_output(meta_path);
    meta_out << meta.dump(2) << '\n';
    result.files.push_back(meta_path);
    return result;
}

CommandResult cmd_figures(const ExperimentConfig& config, const fs::path& out) {
    config.validate();
    const auto hash = config_hash(config);
    const auto rho_dir = format_offset(config.rho_tilde);
    CommandResult result;

    const auto reference = solve(config.market, InternalOrderParams::disabled(), config.solver);
    {
        const auto path = out / "figures" / "Reference" / rho_dir / (hash + "_policy.csv");
        auto csv = open_csv(path, "figures", hash, "q,l in units; depths in price units; t=0; no internal exchange");
        stationary_policy(reference).write_csv(csv);
        result.files.push_back(path);
    }

    for (Scenario scenario : kScenarios) {
        const auto internal = scenario_preset(scenario, config.rho_tilde, config.xi);
        const auto model = solve(config.market, internal, config.solver);
        const fs::path dir = out / "figures" / std::string(to_string(scenario)) / rho_dir;

        const auto policy_path = dir / (hash + "_policy.csv");
        auto policy_csv = open_csv(policy_path, "figures", hash, "q,l in units; depths in price units; t=0; optimal");
        stationary_policy(model).write_csv(policy_csv);
        result.files.push_back(policy_path);

        const auto naive_path = dir / (hash + "_naive.csv");
        auto naive_csv = open_csv(naive_path, "figures", hash, "q,l in units; depths in price units; naive benchmark");
        NaiveStrategy(reference.surface, BenchmarkConfig{config.iota, config.rho_tilde})
            .write_csv(naive_csv, internal.lbar);
        result.files.push_back(naive_path);
    }

    const auto boundary_path = out / "figures" / "boundary" / "all" / (hash + ".csv");
    auto csv = open_csv(boundary_path, "figures", hash,
                        "rho_tilde in price units; boundary_q = largest q that executes at t=0, empty if none");
    csv << "scenario,rho_tilde[price],l[units],boundary_q[units]\n";
    for (Scenario scenario : {Scenario::Iceberg, Scenario::TWAP}) {
        for (double rho : config.boundary_rho_grid) {
            const auto internal = scenario_preset(scenario, rho, config.xi);
            const auto model = solve(config.market, internal, config.solver);
            for (int l = 1; l <= internal.lbar; ++l) {
                csv << to_string(scenario) << ',' << rho << ',' << l << ',';
                if (auto b = model.region.boundary(0, l)) csv << *b;
                csv << '\n';
            }
        }
    }
    result.files.push_back(boundary_path);
    return result;
}

CommandResult cmd_tables(const ExperimentConfig& config, const fs::path& out) {
    config.validate();
    const auto hash = config_hash(config);
    const auto reference = solve(config.market, InternalOrderParams::disabled(), config.solver);
    const double scale = config.sim.report_scale;

    struct Cell {
        Scenario scenario;
        double rho;
        SummaryStats optimal;
        SummaryStats naive;
    };
    std::vector<Cell> cells;
    for (Scenario scenario : kScenarios) {
        for (double rho : config.rho_grid) {
            const auto internal = scenario_preset(scenario, rho, config.xi);
            const auto model = solve(config.market, internal, config.solver);
            Cell cell{scenario, rho, {}, {}};
            cell.optimal = run_monte_carlo(StationaryPolicy(model), config.market, internal, config.sim).summary;
            cell.naive = run_monte_carlo(NaiveStrategy(reference.surface, BenchmarkConfig{config.iota, rho}),
                                         config.market, internal, config.sim)
                             .summary;
            cells.push_back(cell);
        }
    }

    CommandResult result;
    const fs::path dir = out / "tables" / "all" / "all";
    std::ostringstream scale_note;
    scale_note << std::setprecision(12) << scale;

    auto wide_header = [&](std::ostream& csv, const char* mean, const char* sd) {
        csv << "scenario,strategy";
        for (double rho : config.rho_grid) csv << ',' << mean << "@rho=" << format_offset(rho) << ',' << sd << "@rho=" << format_offset(rho);
        csv << ",valid\n";
    };
    auto stats_of = [](const Cell& c, bool optimal) -> const SummaryStats& { return optimal ? c.optimal : c.naive; };

    {
        const auto path = dir / (hash + "_pnl.csv");
        auto csv = open_csv(path, "tables", hash,
                            "P&L = X_T + Q_T S_T in price*size units times report_scale=" + scale_note.str());
        csv << std::setprecision(10);
        wide_header(csv, "pnl_mean", "pnl_std");
        for (Scenario scenario : kScenarios) {
            for (bool optimal : {true, false}) {
                csv << to_string(scenario) << ',' << (optimal ? "optimal" : "naive");
                bool valid = true;
                for (const auto& c : cells) {
                    if (c.scenario != scenario) continue;
                    const auto& s = stats_of(c, optimal);
                    csv << ',' << s.mean_pnl * scale << ',' << s.std_pnl * scale;
                    valid = valid && s.valid;
                }
                csv << ',' << (valid ? 1 : 0) << '\n';
            }
        }
        result.files.push_back(path);
    }
    {
        const auto path = dir / (hash + "_fill_time.csv");
        auto csv = open_csv(path, "tables", hash,
                            "time to first internal fill in seconds over paths with a fill; empty if no path filled");
        csv << std::setprecision(10);
        wide_header(csv, "fill_mean", "fill_std");
        for (Scenario scenario : kScenarios) {
            for (bool optimal : {true, false}) {
                csv << to_string(scenario) << ',' << (optimal ? "optimal" : "naive");
                bool valid = true;
                for (const auto& c : cells) {
                    if (c.scenario != scenario) continue;
                    const auto& s = stats_of(c, optimal);
                    csv << ',';
                    write_optional(csv, s.mean_fill_time);
                    csv << ',';
                    write_optional(csv, s.std_fill_time);
                    valid = valid && s.valid;
                }
                csv << ',' << (valid ? 1 : 0) << '\n';
            }
        }
        result.files.push_back(path);
    }
    {
        const auto path = dir / (hash + "_detail.csv");
        auto csv = open_csv(path, "tables", hash,
                            "pnl/objective in price*size times report_scale; times in s; volume rate in units/s");
        csv << std::setprecision(10)
            << "scenario,strategy,rho_tilde[price],pnl_mean,pnl_std,objective_mean,objective_se,"
               "fill_mean[s],fill_std[s],fill_mean_censored[s],fill_fraction,volume_rate[units/s],clamps,valid\n";
        for (const auto& c : cells) {
            for (bool optimal : {true, false}) {
                const auto& s = stats_of(c, optimal);
                csv << to_string(c.scenario) << ',' << (optimal ? "optimal" : "naive") << ',' << c.rho << ','
                    << s.mean_pnl * scale << ',' << s.std_pnl * scale << ',' << s.mean_objective * scale << ','
                    << s.se_objective * scale << ',';
                write_optional(csv, s.mean_fill_time);
                csv << ',';
                write_optional(csv, s.std_fill_time);
                csv << ',' << s.mean_fill_time_censored << ',' << s.fill_fraction << ',' << s.mean_volume_rate
                    << ',' << s.total_clamps << ',' << (s.valid ? 1 : 0) << '\n';
                result.valid = result.valid && s.valid;
            }
        }
        result.files.push_back(path);
    }
    return result;
}

CommandResult cmd_sweep(const ExperimentConfig& config, const fs::path& out) {
    config.validate();
    const auto hash = config_hash(config);
    const auto base = scenario_preset(config.scenario, config.rho_tilde, 0.0);
    const double scale = config.sim.report_scale;

    const auto fee = sweep(config.market, base, config.solver, config.sim, SweepAxis::Fee, config.fee_grid);
    const auto margin = sweep(config.market, base, config.solver, config.sim, SweepAxis::Margin, config.margin_grid);

    CommandResult result;
    const auto path = out / "sweep" / std::string(to_string(config.scenario)) / format_offset(config.rho_tilde) /
                      (hash + ".csv");
    std::ostringstream scale_note;
    scale_note << std::setprecision(12) << scale;
    auto csv = open_csv(path, "sweep", hash,
                        "value in price units; pnl in price*size times report_scale=" + scale_note.str() +
                            "; volume rate = M_T/T in units/s");
    csv << std::setprecision(10)
        << "axis,value[price],optimal_pnl,optimal_volume_rate[units/s],naive_pnl,naive_volume_rate[units/s],"
           "reference_pnl,valid\n";
    for (const auto* res : {&fee, &margin}) {
        for (const auto& p : res->points) {
            const bool valid = p.optimal.valid && p.naive.valid && res->reference.valid;
            csv << (res->axis == SweepAxis::Fee ? "fee" : "margin") << ',' << p.value << ','
                << p.optimal.mean_pnl * scale << ',' << p.optimal.mean_volume_rate << ','
                << p.naive.mean_pnl * scale << ',' << p.naive.mean_volume_rate << ','
                << res->reference.mean_pnl * scale << ',' << (valid ? 1 : 0) << '\n';
            result.valid = result.valid && valid;
        }
    }
    result.files.push_back(path);
    return result;
}

}  // namespace ixmm
