#pragma once

#include "ixmm/benchmark.hpp"
#include "ixmm/policy.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

namespace ixmm {

struct SimConfig {
    double dt = 0.3;  // decision step
    double horizon = 300.0;
    int n_paths = 5000;
    std::uint64_t seed = 20250101;
    long q0 = 0;
    double x0 = 0.0;
    double s0 = 100.0;
    std::optional<int> l0;      // defaults to lbar (order present at t = 0)
    double report_scale = 1.0;  // price-unit to currency factor for reports
    int threads = 1;            // does not affect results
    bool record_events = false;

    std::int64_t n_steps() const;
    void validate(const MarketParams& market) const;
};

// Evolving state of one path. The two integrals are the rectangle-rule
// running penalties' raw inputs, sampled after the step's executions.
struct SimState {
    std::int64_t step = 0;
    double t = 0.0;
    double s = 0.0;
    long q = 0;
    double x = 0.0;
    int l = 0;
    long m = 0;  // units taken from the internal exchange
    std::optional<double> first_fill_time;
    double inventory_sq_integral = 0.0;  // int Q^2 dt
    double liquidity_integral = 0.0;     // int L^+ dt
    long clamp_count = 0;
};

enum class EventKind { InternalTake, BidFill, AskFill };

struct SimEvent {
    double t;
    EventKind kind;
    int quantity;
    double price;  // absolute transaction price
};

// Independent per-purpose substreams so that paired runs of different
// strategies on the same seed share their mid-price and order-event noise.
struct PathRng {
    std::mt19937_64 fills;
    std::mt19937_64 events;
    std::mt19937_64 replenish;
    std::mt19937_64 diffusion;
    std::normal_distribution<double> normal{0.0, 1.0};

    PathRng(std::uint64_t seed, std::uint64_t path);
};

// Advances one decision step: executions, OTC fills, order events, then the
// mid-price. `events` may be null.
SimState step(const SimState& state, const Strategy& strategy, const MarketParams& market,
              const InternalOrderParams& internal, double dt, PathRng& rng,
              std::vector<SimEvent>* events = nullptr);

struct PathRecord {
    double pnl = 0.0;        // X_T + Q_T S_T
    double objective = 0.0;  // pnl minus the three penalties
    std::optional<double> time_to_first_fill;
    double internal_volume_rate = 0.0;  // M_T / T
    long clamp_count = 0;
    long final_q = 0;
    double final_x = 0.0;
    double final_s = 0.0;
    long internal_volume = 0;
    std::vector<SimEvent> events;
};

PathRecord simulate_path(const Strategy& strategy, const MarketParams& market,
                         const InternalOrderParams& internal, const SimConfig& config,
                         std::uint64_t path);

struct SummaryStats {
    int n_paths = 0;
    double mean_pnl = 0.0;
    double std_pnl = 0.0;
    double mean_objective = 0.0;
    double se_objective = 0.0;
    double fill_fraction = 0.0;  // share of paths with at least one take
    std::optional<double> mean_fill_time;  // over filled paths
    std::optional<double> std_fill_time;
    double mean_fill_time_censored = 0.0;  // unfilled paths count as T
    double mean_volume_rate = 0.0;
    long total_clamps = 0;
    bool valid = true;
};

struct MonteCarloResult {
    std::vector<PathRecord> records;  // ordered by path index
    SummaryStats summary;
};

SummaryStats summarize(std::span<const PathRecord> records, double horizon);

MonteCarloResult run_monte_carlo(const Strategy& strategy, const MarketParams& market,
                                 const InternalOrderParams& internal, const SimConfig& config);

// Columns: path,pnl,objective,first_fill,volume
void write_path_csv(std::ostream& out, std::span<const PathRecord> records);
void write_summary_json(std::ostream& out, const SummaryStats& stats);

enum class SweepAxis { Fee, Margin };

struct SweepPoint {
    double value = 0.0;
    SummaryStats optimal;
    SummaryStats naive;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Fee;
    std::vector<SweepPoint> points;
    SummaryStats reference;  // AS quotes, no internal exchange
};

// Fee axis: xi varies for both strategies (optimal re-solved per point),
// naive margin held at zero. Margin axis: iota varies for the naive strategy,
// fee held at zero. Every point reuses config.seed.
SweepResult sweep(const MarketParams& market, const InternalOrderParams& base,
                  const SolverSettings& solver, const SimConfig& config, SweepAxis axis,
                  std::span<const double> values);

}  // namespace ixmm
