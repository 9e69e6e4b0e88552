#include "ixmm/policy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace ixmm {

const SizeQuote& QuoteLadder::at_size(int size) const {
    for (const auto& q : quotes)
        if (q.size == size) return q;
    throw std::domain_error("quote ladder has no size " + std::to_string(size));
}

std::int64_t level_for_time(const SolverGrid& grid, double t) {
    if (!(t >= 0.0)) return 0;
    // Tolerance absorbs t accumulated as k * dt_sim in floating point.
    const auto n = static_cast<std::int64_t>(std::floor(t / grid.dt + 1e-7));
    return std::clamp<std::int64_t>(n, 0, grid.n_t);
}

QuoteLadder ladder_at(const ValueSurface& surface, std::int64_t level, int q, int l) {
    const auto& grid = surface.grid();
    QuoteLadder ladder;
    ladder.quotes.reserve(surface.market().sizes.size());
    for (const auto& s : surface.market().sizes) {
        SizeQuote quote{s.size, std::nullopt, std::nullopt};
        if (grid.has_q(q + s.size)) quote.bid = optimal_depth(surface, level, q, l, Side::Bid, s.size);
        if (grid.has_q(q - s.size)) quote.ask = optimal_depth(surface, level, q, l, Side::Ask, s.size);
        ladder.quotes.push_back(quote);
    }
    return ladder;
}

StrategyDecision decide(const SolvedModel& model, double t, long q, int l) {
    const auto& grid = model.surface.grid();
    if (l < 0 || l > grid.lbar)
        throw std::domain_error("decide: liquidity level " + std::to_string(l) + " is off-grid");
    StrategyDecision d;
    int node_q = static_cast<int>(std::clamp<long>(q, grid.q_min, grid.q_max));
    d.clamped = node_q != q;
    const auto level = level_for_time(grid, t);
    d.ladder = ladder_at(model.surface, level, node_q, l);
    d.execute_now = l >= 1 && model.region.contains(level, node_q, l);
    return d;
}

StrategyDecision TimeDependentPolicy::decide(double t, long q, int l) const {
    return ixmm::decide(*model_, t, q, l);
}

StationaryPolicy::StationaryPolicy(const SolvedModel& model)
    : q_min_(model.surface.grid().q_min),
      q_max_(model.surface.grid().q_max),
      lbar_(model.surface.grid().lbar),
      sizes_(model.surface.market().size_list()) {
    const std::size_t count = static_cast<std::size_t>(q_max_ - q_min_ + 1) * (lbar_ + 1);
    ladders_.resize(count);
    execute_.resize(count);
    for (int q = q_min_; q <= q_max_; ++q)
        for (int l = 0; l <= lbar_; ++l) {
            ladders_[index(q, l)] = ladder_at(model.surface, 0, q, l);
            execute_[index(q, l)] = l >= 1 && model.region.contains(0, q, l);
        }
}

std::size_t StationaryPolicy::index(int q, int l) const {
    return static_cast<std::size_t>(q - q_min_) * (lbar_ + 1) + static_cast<std::size_t>(l);
}

const QuoteLadder& StationaryPolicy::ladder(int q, int l) const {
    if (q < q_min_ || q > q_max_ || l < 0 || l > lbar_)
        throw std::domain_error("stationary policy: node off-grid");
    return ladders_[index(q, l)];
}

bool StationaryPolicy::execute(int q, int l) const {
    if (q < q_min_ || q > q_max_ || l < 0 || l > lbar_)
        throw std::domain_error("stationary policy: node off-grid");
    return execute_[index(q, l)] != 0;
}

StrategyDecision StationaryPolicy::decide(double /*t*/, long q, int l) const {
    if (l < 0 || l > lbar_)
        throw std::domain_error("decide: liquidity level " + std::to_string(l) + " is off-grid");
    const int node_q = static_cast<int>(std::clamp<long>(q, q_min_, q_max_));
    return {ladders_[index(node_q, l)], execute_[index(node_q, l)] != 0, node_q != q};
}

void StationaryPolicy::write_csv(std::ostream& out) const {
    write_policy_csv_header(out, sizes_);
    for (int l = 0; l <= lbar_; ++l)
        for (int q = q_min_; q <= q_max_; ++q) write_policy_csv_row(out, q, l, decide(0.0, q, l));
}

StationaryPolicy stationary_policy(const SolvedModel& model) { return StationaryPolicy(model); }

void write_policy_csv_header(std::ostream& out, const std::vector<int>& sizes) {
    out << "q[units],l[units],execute";
    for (int z : sizes) out << ",bid_" << z << "[price],ask_" << z << "[price]";
    out << '\n';
}

void write_policy_csv_row(std::ostream& out, int q, int l, const StrategyDecision& decision) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << q << ',' << l << ',' << (decision.execute_now ? 1 : 0) << std::setprecision(10);
    for (const auto& quote : decision.ladder.quotes) {
        out << ',';
        if (quote.bid) out << *quote.bid;
        out << ',';
        if (quote.ask) out << *quote.ask;
    }
    out << '\n';
    out.flags(flags);
    out.precision(precision);
}

}  // namespace ixmm
