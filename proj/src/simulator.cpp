#include "ixmm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <stdexcept>
#include <thread>

namespace ixmm {

namespace {

constexpr int kMaxTakesPerStep = 100000;

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t path, std::uint32_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                      purpose};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& engine) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path)
    : fills(substream(seed, path, 1)),
      events(substream(seed, path, 2)),
      replenish(substream(seed, path, 3)),
      diffusion(substream(seed, path, 4)) {}

std::int64_t SimConfig::n_steps() const { return std::llround(horizon / dt); }

void SimConfig::validate(const MarketParams& market) const {
    if (!(dt > 0.0)) throw std::invalid_argument("sim: dt must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("sim: horizon must be positive");
    if (n_paths < 1) throw std::invalid_argument("sim: n_paths must be >= 1");
    if (threads < 1) throw std::invalid_argument("sim: threads must be >= 1");
    if (std::abs(static_cast<double>(n_steps()) * dt - horizon) > 1e-9 * horizon)
        throw std::invalid_argument("sim: horizon is not an integer multiple of dt");
    // Thinning guard on the quote-independent intensity scale.
    if (dt * market.total_base_intensity() > 0.5)
        throw std::invalid_argument("sim: dt * total fill intensity exceeds 0.5");
}

SimState step(const SimState& state, const Strategy& strategy, const MarketParams& market,
              const InternalOrderParams& internal, double dt, PathRng& rng,
              std::vector<SimEvent>* events) {
    SimState next = state;
    const double rho = effective_offset(internal);

    // (i) dealer takes from the internal exchange, one unit at a time.
    auto decision = strategy.decide(next.t, next.q, next.l);
    if (decision.clamped) ++next.clamp_count;
    int takes = 0;
    while (internal.enabled && decision.execute_now && next.l >= 1) {
        const double price = next.s + rho;
        next.q += 1;
        next.x -= price;
        next.m += 1;
        if (!next.first_fill_time) next.first_fill_time = next.t;
        if (events) events->push_back({next.t, EventKind::InternalTake, 1, price});
        next.l -= 1;
        if (next.l == 0 && uniform(rng.replenish) < internal.p) next.l = internal.lbar;
        if (++takes > kMaxTakesPerStep)
            throw std::runtime_error("simulator: execution loop did not terminate");
        decision = strategy.decide(next.t, next.q, next.l);
        if (decision.clamped) ++next.clamp_count;
    }

    next.inventory_sq_integral += static_cast<double>(next.q) * static_cast<double>(next.q) * dt;
    next.liquidity_integral += static_cast<double>(std::max(next.l, 0)) * dt;

    // (ii) OTC fills; one uniform per (size, side) every step.
    const double s = next.s;
    for (const auto& quote : decision.ladder.quotes) {
        const double u_bid = uniform(rng.fills);
        const double u_ask = uniform(rng.fills);
        if (quote.bid) {
            const double prob = std::min(1.0, fill_intensity(Side::Bid, quote.size, *quote.bid, market) * dt);
            if (u_bid < prob) {
                const double price = s - *quote.bid;
                next.q += quote.size;
                next.x -= quote.size * price;
                if (events) events->push_back({next.t, EventKind::BidFill, quote.size, price});
            }
        }
        if (quote.ask) {
            const double prob = std::min(1.0, fill_intensity(Side::Ask, quote.size, *quote.ask, market) * dt);
            if (u_ask < prob) {
                const double price = s + *quote.ask;
                next.q -= quote.size;
                next.x += quote.size * price;
                if (events) events->push_back({next.t, EventKind::AskFill, quote.size, price});
            }
        }
    }

    // (iii) client cancellation or arrival.
    const double u_event = uniform(rng.events);
    if (internal.enabled) {
        if (next.l > 0) {
            if (u_event < internal.nu * dt) next.l = 0;
        } else if (u_event < internal.mu * dt) {
            next.l = internal.lbar;
        }
    }

    // (iv) mid-price.
    next.s += market.sigma * std::sqrt(dt) * rng.normal(rng.diffusion);
    next.step += 1;
    next.t = static_cast<double>(next.step) * dt;
    return next;
}

PathRecord simulate_path(const Strategy& strategy, const MarketParams& market,
                         const InternalOrderParams& internal, const SimConfig& config,
                         std::uint64_t path) {
    SimState state;
    state.s = config.s0;
    state.q = config.q0;
    state.x = config.x0;
    state.l = config.l0.value_or(internal.max_level());
    if (state.l < 0 || state.l > internal.max_level())
        throw std::invalid_argument("sim: initial liquidity outside 0..lbar");

    PathRng rng(config.seed, path);
    PathRecord record;
    auto* log = config.record_events ? &record.events : nullptr;
    const auto steps = config.n_steps();
    for (std::int64_t n = 0; n < steps; ++n) state = step(state, strategy, market, internal, config.dt, rng, log);

    record.pnl = state.x + static_cast<double>(state.q) * state.s;
    record.objective = record.pnl - market.alpha * static_cast<double>(state.q) * static_cast<double>(state.q) -
                       market.phi * state.inventory_sq_integral - market.psi * state.liquidity_integral;
    record.time_to_first_fill = state.first_fill_time;
    record.internal_volume = state.m;
    record.internal_volume_rate = static_cast<double>(state.m) / config.horizon;
    record.clamp_count = state.clamp_count;
    record.final_q = state.q;
    record.final_x = state.x;
    record.final_s = state.s;
    return record;
}

SummaryStats summarize(std::span<const PathRecord> records, double horizon) {
    SummaryStats out;
    out.n_paths = static_cast<int>(records.size());
    if (records.empty()) return out;
    const double n = static_cast<double>(records.size());

    double pnl_sum = 0.0, obj_sum = 0.0, vol_sum = 0.0, censored_sum = 0.0;
    double fill_sum = 0.0;
    int filled = 0;
    for (const auto& r : records) {
        pnl_sum += r.pnl;
        obj_sum += r.objective;
        vol_sum += r.internal_volume_rate;
        out.total_clamps += r.clamp_count;
        if (r.time_to_first_fill) {
            ++filled;
            fill_sum += *r.time_to_first_fill;
            censored_sum += *r.time_to_first_fill;
        } else {
            censored_sum += horizon;
        }
    }
    out.mean_pnl = pnl_sum / n;
    out.mean_objective = obj_sum / n;
    out.mean_volume_rate = vol_sum / n;
    out.mean_fill_time_censored = censored_sum / n;
    out.fill_fraction = filled / n;

    double pnl_ss = 0.0, obj_ss = 0.0, fill_ss = 0.0;
    const double fill_mean = filled > 0 ? fill_sum / filled : 0.0;
    for (const auto& r : records) {
        pnl_ss += (r.pnl - out.mean_pnl) * (r.pnl - out.mean_pnl);
        obj_ss += (r.objective - out.mean_objective) * (r.objective - out.mean_objective);
        if (r.time_to_first_fill)
            fill_ss += (*r.time_to_first_fill - fill_mean) * (*r.time_to_first_fill - fill_mean);
    }
    if (records.size() > 1) {
        out.std_pnl = std::sqrt(pnl_ss / (n - 1.0));
        out.se_objective = std::sqrt(obj_ss / (n - 1.0)) / std::sqrt(n);
    }
    if (filled > 0) {
        out.mean_fill_time = fill_mean;
        out.std_fill_time = filled > 1 ? std::sqrt(fill_ss / (filled - 1.0)) : 0.0;
    }
    out.valid = out.total_clamps == 0;
    return out;
}

MonteCarloResult run_monte_carlo(const Strategy& strategy, const MarketParams& market,
                                 const InternalOrderParams& internal, const SimConfig& config) {
    market.validate();
    internal.validate();
    config.validate(market);

    MonteCarloResult result;
    result.records.resize(static_cast<std::size_t>(config.n_paths));
    const int workers = std::min(config.threads, config.n_paths);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    auto work = [&](int worker) {
        try {
            for (int k = worker; k < config.n_paths; k += workers)
                result.records[static_cast<std::size_t>(k)] =
                    simulate_path(strategy, market, internal, config, static_cast<std::uint64_t>(k));
        } catch (...) {
            errors[static_cast<std::size_t>(worker)] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    result.summary = summarize(result.records, config.horizon);
    return result;
}

void write_path_csv(std::ostream& out, std::span<const PathRecord> records) {
    const auto precision = out.precision();
    out << "path,pnl[price*size],objective[price*size],first_fill[s],volume[units]\n"
        << std::setprecision(12);
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        out << k << ',' << r.pnl << ',' << r.objective << ',';
        if (r.time_to_first_fill) out << *r.time_to_first_fill;
        out << ',' << r.internal_volume << '\n';
    }
    out.precision(precision);
}

void write_summary_json(std::ostream& out, const SummaryStats& s) {
    const auto precision = out.precision();
    out << std::setprecision(12) << "{\"n_paths\": " << s.n_paths << ", \"mean_pnl\": " << s.mean_pnl
        << ", \"std_pnl\": " << s.std_pnl << ", \"mean_objective\": " << s.mean_objective
        << ", \"se_objective\": " << s.se_objective << ", \"fill_fraction\": " << s.fill_fraction
        << ", \"mean_fill_time\": ";
    if (s.mean_fill_time) out << *s.mean_fill_time; else out << "null";
    out << ", \"std_fill_time\": ";
    if (s.std_fill_time) out << *s.std_fill_time; else out << "null";
    out << ", \"mean_fill_time_censored\": " << s.mean_fill_time_censored
        << ", \"mean_volume_rate\": " << s.mean_volume_rate << ", \"total_clamps\": " << s.total_clamps
        << ", \"valid\": " << (s.valid ? "true" : "false") << "}";
    out.precision(precision);
}

SweepResult sweep(const MarketParams& market, const InternalOrderParams& base,
                  const SolverSettings& solver, const SimConfig& config, SweepAxis axis,
                  std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sweep: empty value grid");
    SweepResult result;
    result.axis = axis;

    const auto reference = solve(market, InternalOrderParams::disabled(), solver);
    const auto disabled = InternalOrderParams::disabled();
    result.reference =
        run_monte_carlo(ReferenceStrategy(reference.surface), market, disabled, config).summary;

    InternalOrderParams fee_free = base;
    fee_free.xi = 0.0;
    std::optional<SolvedModel> fixed_optimal;
    std::optional<SummaryStats> fixed_optimal_stats;
    if (axis == SweepAxis::Margin) {
        fixed_optimal.emplace(solve(market, fee_free, solver));
        fixed_optimal_stats =
            run_monte_carlo(StationaryPolicy(*fixed_optimal), market, fee_free, config).summary;
    }

    for (double value : values) {
        SweepPoint point;
        point.value = value;
        if (axis == SweepAxis::Fee) {
            InternalOrderParams internal = base;
            internal.xi = value;
            const auto optimal = solve(market, internal, solver);
            point.optimal = run_monte_carlo(StationaryPolicy(optimal), market, internal, config).summary;
            const NaiveStrategy naive(reference.surface, BenchmarkConfig{0.0, internal.rho_tilde});
            point.naive = run_monte_carlo(naive, market, internal, config).summary;
        } else {
            point.optimal = *fixed_optimal_stats;
            const NaiveStrategy naive(reference.surface, BenchmarkConfig{value, fee_free.rho_tilde});
            point.naive = run_monte_carlo(naive, market, fee_free, config).summary;
        }
        result.points.push_back(point);
    }
    return result;
}

}  // namespace ixmm
