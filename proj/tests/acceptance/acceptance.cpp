// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include "ixmm/experiments.hpp"

#include "../oracle/dense_dp.hpp"
#include "../oracle/vwap_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace ixmm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kResidualTol = 1e-10;
constexpr double kObstacleTol = 1e-12;
constexpr double kSymmetryTol = 1e-12;
constexpr double kOracleTol = 1e-6;
constexpr double kValueSE = 3.0;
constexpr double kVwapTol = 1e-12;

const std::vector<Scenario> kScenarios{Scenario::Iceberg, Scenario::TWAP, Scenario::FullAmount};
const std::vector<double> kOffsets{-0.2, 0.0, 0.2};

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Solved surfaces shared across criteria.
class Cache {
public:
    explicit Cache(MarketParams market) : market_(std::move(market)) {}

    const SolvedModel& get(Scenario scenario, double rho, double xi = 0.0) {
        const auto key = std::to_string(static_cast<int>(scenario)) + "/" + format_offset(rho) + "/" +
                         format_offset(xi);
        auto it = models_.find(key);
        if (it == models_.end())
            it = models_.emplace(key, solve(market_, scenario_preset(scenario, rho, xi), SolverSettings{})).first;
        return it->second;
    }

    const SolvedModel& reference() {
        if (!reference_) reference_ = solve(market_, InternalOrderParams::disabled(), SolverSettings{});
        return *reference_;
    }

    std::vector<const SolvedModel*> all() const {
        std::vector<const SolvedModel*> out;
        for (const auto& [key, model] : models_) out.push_back(&model);
        if (reference_) out.push_back(&*reference_);
        return out;
    }

private:
    MarketParams market_;
    std::map<std::string, SolvedModel> models_;
    std::optional<SolvedModel> reference_;
};

struct CellStats {
    SummaryStats optimal;
    SummaryStats naive;
    SummaryStats time_dependent;
    double h0 = 0.0;
};

Outcome terminal_exactness(Cache& cache) {
    Outcome o;
    double worst = 0.0;
    for (const auto* model : cache.all()) {
        const auto& s = model->surface;
        const auto& g = s.grid();
        for (int q = g.q_min; q <= g.q_max; ++q)
            for (int l = 0; l <= g.lbar; ++l)
                worst = std::max(worst, std::abs(s.h(g.n_t, q, l) + s.market().alpha * (q * q)));
    }
    o.require(worst == 0.0, fmt("max |h(T)+alpha q^2| = %.3g", worst));
    o.detail = o.pass ? "max |h(T)+alpha q^2| = 0 on every solved surface" : o.detail;
    return o;
}

Outcome residuals(Cache& cache) {
    Outcome o;
    double worst = 0.0;
    for (const auto* model : cache.all()) worst = std::max(worst, qvi_residual(model->surface));
    o.require(worst <= kResidualTol, fmt("worst residual %.3g", worst));
    if (o.pass) o.detail = fmt("worst residual %.3g over ", worst) + std::to_string(cache.all().size()) + " surfaces";
    return o;
}

Outcome obstacle(Cache& cache) {
    Outcome o;
    double worst = 0.0;
    for (const auto* model : cache.all()) {
        const auto& s = model->surface;
        const auto& g = s.grid();
        if (g.lbar == 0) continue;
        // The terminal slice is the assigned boundary condition; the
        // inequality is part of the QVI on t < T.
        for (std::int64_t n = 0; n < g.n_t; ++n)
            for (int q = g.q_min; q < g.q_max; ++q)
                for (int l = 1; l <= g.lbar; ++l)
                    worst = std::max(worst, intervention_value(s, n, q, l) - s.h(n, q, l));
    }
    o.require(worst <= kObstacleTol, fmt("max (iv - h) = %.3g", worst));
    if (o.pass) o.detail = fmt("max (iv - h) = %.3g for t < T", worst);
    return o;
}

Outcome symmetry(Cache& cache) {
    Outcome o;
    const auto& ref = cache.reference();
    const auto& s = ref.surface;
    const auto& g = s.grid();
    double worst_h = 0.0, worst_d = 0.0;
    for (std::int64_t n = 0; n <= g.n_t; ++n) {
        for (int q = 0; q <= g.q_max; ++q) {
            worst_h = std::max(worst_h, std::abs(s.h(n, q, 0) - s.h(n, -q, 0)));
            for (int z : s.market().size_list()) {
                if (!g.has_q(q + z) || !g.has_q(-q - z)) continue;
                worst_d = std::max(worst_d, std::abs(optimal_depth(s, n, q, 0, Side::Bid, z) -
                                                     optimal_depth(s, n, -q, 0, Side::Ask, z)));
            }
        }
    }
    o.require(worst_h <= kSymmetryTol && worst_d <= kSymmetryTol, "asymmetry");
    o.detail = fmt("max |h(q)-h(-q)| = %.3g, max depth mismatch = %.3g", worst_h, worst_d);
    return o;
}

Outcome dense_oracle() {
    Outcome o;
    double worst = 0.0;
    for (double rho : {-0.05, 0.0, 0.1}) {
        oracle::DenseInstance inst;
        inst.rho = rho;
        const auto expected = oracle::dense_dp(inst);
        MarketParams m;
        m.sizes = {{inst.size, inst.lambda_bid, inst.lambda_ask, inst.kappa}};
        m.alpha = inst.alpha;
        m.phi = inst.phi;
        m.psi = inst.psi;
        m.horizon = inst.horizon;
        const InternalOrderParams internal{true, inst.lbar, inst.nu, inst.mu, inst.p, inst.rho, 0.0};
        const auto model = solve(m, internal, SolverSettings{inst.dt, inst.q_min, inst.q_max});
        const auto& g = model.surface.grid();
        for (std::int64_t n = 0; n <= g.n_t; ++n)
            for (int q = g.q_min; q <= g.q_max; ++q)
                for (int l = 0; l <= g.lbar; ++l)
                    worst = std::max(worst, std::abs(model.surface.h(n, q, l) - expected[n][g.node(q, l)]));
    }
    o.require(worst <= kOracleTol, "");
    o.detail = fmt("max |h - h_dense| = %.3g", worst);
    return o;
}

std::string describe_boundary(const std::optional<int>& b) { return b ? std::to_string(*b) : "none"; }

Outcome boundaries(Cache& cache) {
    Outcome o;
    const auto& twap = cache.get(Scenario::TWAP, 0.0);
    const auto& g = twap.surface.grid();
    bool twap_ok = true;
    for (int q = g.q_min; q <= g.q_max; ++q) twap_ok = twap_ok && twap.region.contains(0, q, 1) == (q < 0);
    o.require(twap_ok, "TWAP region != {q<0} (boundary " + describe_boundary(twap.region.boundary(0, 1)) + ")");

    const auto& fa = cache.get(Scenario::FullAmount, 0.0);
    std::string fa_bad;
    for (int l = 1; l <= fa.surface.grid().lbar; ++l) {
        bool ok = true;
        for (int q = g.q_min; q <= g.q_max; ++q) ok = ok && fa.region.contains(0, q, l) == (q < 5);
        if (!ok) fa_bad += " l=" + std::to_string(l) + ":q*=" + describe_boundary(fa.region.boundary(0, l));
    }
    o.require(fa_bad.empty(), "FullAmount region != {q<5} at" + fa_bad);

    const auto& ice = cache.get(Scenario::Iceberg, 0.0);
    const auto ice_b = ice.region.boundary(0, 1);
    o.require(ice_b && *ice_b <= -2 && !ice.region.contains(0, *ice_b + 1, 1),
              "Iceberg boundary " + describe_boundary(ice_b));
    if (o.pass) o.detail = "TWAP q*=-1, FullAmount q*=4 for all l, Iceberg q*=" + describe_boundary(ice_b);
    return o;
}

Outcome value_consistency(const std::map<std::pair<int, int>, CellStats>& cells) {
    Outcome o;
    double worst = 0.0;
    for (const auto& [key, cell] : cells) {
        const double z = (cell.time_dependent.mean_objective - cell.h0) / cell.time_dependent.se_objective;
        worst = std::max(worst, std::abs(z));
        if (std::abs(z) > kValueSE)
            o.require(false, std::string(to_string(kScenarios[key.first])) + " rho=" +
                                 format_offset(kOffsets[key.second]) + fmt(" z=%.2f", z));
    }
    if (o.pass) o.detail = fmt("max |mean objective - h0| = %.2f SE", worst);
    return o;
}

Outcome pnl_pattern(const std::map<std::pair<int, int>, CellStats>& cells) {
    Outcome o;
    for (const auto& [key, cell] : cells)
        if (!(cell.optimal.mean_pnl > cell.naive.mean_pnl))
            o.require(false, std::string(to_string(kScenarios[key.first])) + " rho=" +
                                 format_offset(kOffsets[key.second]) +
                                 fmt(": optimal %.3f <= naive %.3f", cell.optimal.mean_pnl, cell.naive.mean_pnl));
    for (int s : {1, 2}) {
        for (int r = 1; r < 3; ++r)
            if (!(cells.at({s, r}).optimal.mean_pnl < cells.at({s, r - 1}).optimal.mean_pnl))
                o.require(false, std::string(to_string(kScenarios[s])) + " optimal P&L not decreasing in rho");
    }
    if (o.pass) o.detail = "optimal > naive in all 9 cells; TWAP/FA optimal decreasing in rho";
    return o;
}

Outcome fill_time_pattern(const std::map<std::pair<int, int>, CellStats>& cells) {
    Outcome o;
    for (int r = 0; r < 3; ++r) {
        const auto& fa = cells.at({2, r}).optimal;
        o.require(fa.fill_fraction == 1.0 && fa.mean_fill_time == 0.0,
                  "FA optimal fill time not 0 at rho=" + format_offset(kOffsets[r]));
    }
    const auto& twap = cells.at({1, 0}).optimal;
    o.require(twap.fill_fraction == 1.0 && twap.mean_fill_time == 0.0, "TWAP optimal fill time not 0 at rho=-0.2");
    for (int s = 0; s < 3; ++s) {
        for (int r = 1; r < 3; ++r) {
            const auto& a = cells.at({s, r - 1}).naive.mean_fill_time;
            const auto& b = cells.at({s, r}).naive.mean_fill_time;
            o.require(a && b && *b > *a, std::string(to_string(kScenarios[s])) + " naive fill time not increasing");
        }
    }
    // FullAmount's optimal fill time is pinned at 0 above, so the ordering
    // against naive applies to the two passive-order scenarios.
    for (int s : {0, 1}) {
        for (int r : {1, 2}) {
            const auto& opt = cells.at({s, r}).optimal.mean_fill_time;
            const auto& nv = cells.at({s, r}).naive.mean_fill_time;
            o.require(opt && nv && *opt > *nv, std::string(to_string(kScenarios[s])) + " rho=" +
                                                   format_offset(kOffsets[r]) + " optimal fill <= naive");
        }
    }
    if (o.pass) o.detail = "FA and TWAP(rho=-0.2) optimal at 0; naive increasing; optimal > naive for Iceberg/TWAP";
    return o;
}

Outcome sweep_pattern(const MarketParams& market, const SimConfig& sim) {
    Outcome o;
    const std::vector<double> grid{0.0, 0.05, 0.1, 0.15, 0.2};
    const auto base = scenario_preset(Scenario::Iceberg, 0.0, 0.0);
    const auto fee = sweep(market, base, SolverSettings{}, sim, SweepAxis::Fee, grid);
    const auto margin = sweep(market, base, SolverSettings{}, sim, SweepAxis::Margin, grid);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        o.require(fee.points[k].optimal.mean_pnl >= fee.points[k - 1].optimal.mean_pnl,
                  "optimal P&L decreases at fee " + format_offset(grid[k]));
        o.require(fee.points[k].naive.mean_pnl > fee.points[k - 1].naive.mean_pnl,
                  "naive P&L not increasing at fee " + format_offset(grid[k]));
        o.require(margin.points[k].naive.mean_volume_rate < margin.points[k - 1].naive.mean_volume_rate,
                  "naive volume not decreasing at margin " + format_offset(grid[k]));
        o.require(margin.points[k].naive.mean_pnl > margin.points[k - 1].naive.mean_pnl,
                  "naive P&L not increasing at margin " + format_offset(grid[k]));
    }
    if (o.pass)
        o.detail = fmt("Iceberg: optimal P&L %.3f -> %.3f over fees", fee.points.front().optimal.mean_pnl,
                       fee.points.back().optimal.mean_pnl) +
                   fmt(", naive volume %.4f -> %.4f over margins", margin.points.front().naive.mean_volume_rate,
                       margin.points.back().naive.mean_volume_rate);
    return o;
}

Outcome vwap_oracle() {
    Outcome o;
    std::mt19937_64 rng(20250101);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    int compared = 0;
    while (compared < 1000) {
        const int levels = 1 + static_cast<int>(rng() % 5);
        std::vector<int> sizes;
        int size = 0;
        for (int k = 0; k < levels; ++k) sizes.push_back(size += 1 + static_cast<int>(rng() % 8));
        std::vector<double> depths;
        double marginal = -0.5 + unit(rng), cost = 0.0;
        int prev = 0;
        for (int z : sizes) {
            cost += (z - prev) * marginal;
            depths.push_back(cost / z);
            prev = z;
            marginal += 0.6 * unit(rng);
        }
        QuoteLadder ladder;
        for (std::size_t k = 0; k < sizes.size(); ++k) ladder.quotes.push_back({sizes[k], 0.3, depths[k]});
        const int slice = 1 + static_cast<int>(rng() % 12);
        const double rho = -0.4 + unit(rng), iota = 0.3 * unit(rng);
        const auto got = vwap_adjusted_ask(ladder, slice, rho, iota);
        if (got.insertion_undefined) continue;
        const auto expected = oracle::vwap_insert(sizes, depths, slice, rho + iota);
        for (std::size_t k = 0; k < sizes.size(); ++k)
            worst = std::max(worst, std::abs(*got.ladder.quotes[k].ask - expected[k]));
        ++compared;
    }
    o.require(worst <= kVwapTol, "");
    o.detail = fmt("max |vwap - oracle| = %.3g over 1000 ladders", worst);
    return o;
}

Outcome determinism() {
    Outcome o;
    ExperimentConfig c;
    c.sim.n_paths = 100;
    c.rho_grid = {0.0};
    c.boundary_rho_grid = {0.0, 0.1};
    c.fee_grid = {0.0, 0.1};
    c.margin_grid = {0.0, 0.1};
    c.solver.q_min = -12;
    c.solver.q_max = 12;
    const auto root = fs::temp_directory_path() / "ixmm_acceptance_determinism";
    using Command = std::function<CommandResult(const ExperimentConfig&, const fs::path&)>;
    const std::vector<std::pair<std::string, Command>> commands{
        {"solve", cmd_solve}, {"figures", cmd_figures}, {"tables", cmd_tables}, {"sweep", cmd_sweep}};
    int files = 0;
    for (const auto& [name, command] : commands) {
        fs::remove_all(root);
        auto first_cfg = c;
        first_cfg.sim.threads = 1;
        const auto first = command(first_cfg, root / "a");
        auto second_cfg = c;
        second_cfg.sim.threads = 2;
        const auto second = command(second_cfg, root / "b");
        o.require(first.files.size() == second.files.size(), name + ": file lists differ");
        for (std::size_t k = 0; k < first.files.size() && k < second.files.size(); ++k) {
            ++files;
            if (slurp(first.files[k]) != slurp(second.files[k]))
                o.require(false, name + ": " + first.files[k].filename().string() + " differs");
        }
    }
    fs::remove_all(root);
    if (o.pass) o.detail = std::to_string(files) + " output files byte-identical across re-runs";
    return o;
}

}  // namespace

int main() {
    const auto market = paper_market_params();
    SimConfig sim;  // 5,000 paths, 0.3 s, fixed seed

    Cache cache(market);
    cache.reference();
    for (Scenario s : kScenarios)
        for (double rho : kOffsets) cache.get(s, rho);
    for (double rho : {-0.15, -0.1, -0.05, 0.05, 0.1, 0.15}) {
        cache.get(Scenario::Iceberg, rho);
        cache.get(Scenario::TWAP, rho);
    }
    for (double xi : {0.05, 0.1, 0.15, 0.2}) cache.get(Scenario::Iceberg, 0.0, xi);

    std::map<std::pair<int, int>, CellStats> cells;
    for (int s = 0; s < 3; ++s) {
        for (int r = 0; r < 3; ++r) {
            const auto internal = scenario_preset(kScenarios[s], kOffsets[r], 0.0);
            const auto& model = cache.get(kScenarios[s], kOffsets[r]);
            CellStats cell;
            cell.optimal = run_monte_carlo(StationaryPolicy(model), market, internal, sim).summary;
            cell.naive = run_monte_carlo(NaiveStrategy(cache.reference().surface, {0.1, kOffsets[r]}), market,
                                         internal, sim)
                             .summary;
            cell.time_dependent = run_monte_carlo(TimeDependentPolicy(model), market, internal, sim).summary;
            cell.h0 = model.surface.h(0, 0, internal.lbar);
            cells[{s, r}] = cell;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"terminal condition exactness", [&] { return terminal_exactness(cache); }},
        {"QVI self-consistency", [&] { return residuals(cache); }},
        {"obstacle inequality", [&] { return obstacle(cache); }},
        {"symmetry with internal exchange disabled", [&] { return symmetry(cache); }},
        {"dense-search oracle on the small instance", [] { return dense_oracle(); }},
        {"execution boundaries at zero offset", [&] { return boundaries(cache); }},
        {"value consistency of the time-dependent policy", [&] { return value_consistency(cells); }},
        {"P&L ordering optimal vs naive", [&] { return pnl_pattern(cells); }},
        {"first-fill-time pattern", [&] { return fill_time_pattern(cells); }},
        {"fee and margin sweep pattern", [&] { return sweep_pattern(market, sim); }},
        {"VWAP insertion oracle", [] { return vwap_oracle(); }},
        {"byte-identical re-runs", [] { return determinism(); }},
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome outcome;
        try {
            outcome = criteria[k].second();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        if (!outcome.pass) ++failed;
        std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
