#include "ixmm/benchmark.hpp"

#include <algorithm>
#include <stdexcept>

namespace ixmm {

void BenchmarkConfig::validate() const {
    if (!(iota >= 0.0)) throw std::invalid_argument("benchmark: margin iota must be >= 0");
}

QuoteLadder as_depths(const ValueSurface& reference, int q) {
    if (!reference.grid().has_q(q))
        throw std::domain_error("as_depths: inventory " + std::to_string(q) + " is off-grid");
    return ladder_at(reference, 0, q, 0);
}

VwapAdjustment vwap_adjusted_ask(const QuoteLadder& as_ladder, int l, double rho_tilde,
                                 double iota) {
    VwapAdjustment out{as_ladder, false, false};
    if (l <= 0) return out;

    // Quoted ask sizes form the ladder; index 0 is the empty position z_0 = 0
    // with zero cumulative cost.
    std::vector<std::size_t> entry;  // position in as_ladder.quotes
    std::vector<double> z{0.0};
    std::vector<double> cost{0.0};
    for (std::size_t k = 0; k < as_ladder.quotes.size(); ++k) {
        const auto& quote = as_ladder.quotes[k];
        if (!quote.ask) continue;
        entry.push_back(k);
        z.push_back(quote.size);
        cost.push_back(quote.size * *quote.ask);
    }
    const std::size_t levels = entry.size();
    if (levels == 0) {
        out.insertion_undefined = true;
        return out;
    }
    auto marginal = [&](std::size_t k) { return (cost[k] - cost[k - 1]) / (z[k] - z[k - 1]); };

    const double price = rho_tilde + iota;
    if (l > z[levels]) out.capped = true;

    // The slice goes in front of the first tranche whose marginal price is
    // above it. For convex ladders this is where a literal price-ordered
    // insertion puts it; comparing against the size-averaged depths instead
    // can leave a cheaper slice out of a smaller size's VWAP.
    std::size_t first = 0;
    for (std::size_t k = 1; k <= levels; ++k)
        if (price < marginal(k)) {
            first = k;
            break;
        }
    if (first == 0) {
        out.insertion_undefined = true;
        return out;
    }

    // Cumulative AS cost of the cheapest u units.
    auto cumulative = [&](double u) {
        std::size_t k = 1;
        while (k < levels && u > z[k]) ++k;
        return cost[k - 1] + (u - z[k - 1]) * marginal(k);
    };

    const double slice = l;
    for (std::size_t j = first; j <= levels; ++j) {
        double total;
        if (slice <= z[j] - z[j - 1]) {
            // Slice fits inside tranche j: slice cost, the untouched prefix,
            // tranches shifted up by l, and the remainder of each tranche.
            total = slice * price + cost[first - 1];
            for (std::size_t r = first + 1; r <= j; ++r) total += slice * marginal(r - 1);
            for (std::size_t r = first; r <= j; ++r) total += (z[r] - z[r - 1] - slice) * marginal(r);
        } else {
            // Slice spans several tranches: it displaces the most expensive
            // units of the first z_j.
            const double taken = std::min(slice, z[j] - z[first - 1]);
            total = taken * price + cumulative(z[j] - taken);
        }
        out.ladder.quotes[entry[j - 1]].ask = total / z[j];
    }
    return out;
}

bool naive_decision(long q, int l) { return l >= 1 && q < 0; }

NaiveStrategy::NaiveStrategy(const ValueSurface& reference, BenchmarkConfig config)
    : q_min_(reference.grid().q_min),
      q_max_(reference.grid().q_max),
      config_(config),
      sizes_(reference.market().size_list()) {
    config_.validate();
    for (int q = q_min_; q <= q_max_; ++q) as_ladders_.push_back(as_depths(reference, q));
}

StrategyDecision NaiveStrategy::decide(double /*t*/, long q, int l) const {
    StrategyDecision d;
    const int node_q = static_cast<int>(std::clamp<long>(q, q_min_, q_max_));
    d.clamped = node_q != q;
    d.execute_now = naive_decision(q, l);
    const auto& as = as_ladders_[static_cast<std::size_t>(node_q - q_min_)];
    d.ladder = l > 0 ? vwap_adjusted_ask(as, l, config_.rho_tilde, config_.iota).ladder : as;
    return d;
}

void NaiveStrategy::write_csv(std::ostream& out, int lbar) const {
    write_policy_csv_header(out, sizes_);
    for (int l = 0; l <= lbar; ++l)
        for (int q = q_min_; q <= q_max_; ++q) write_policy_csv_row(out, q, l, decide(0.0, q, l));
}

ReferenceStrategy::ReferenceStrategy(const ValueSurface& reference)
    : q_min_(reference.grid().q_min), q_max_(reference.grid().q_max) {
    for (int q = q_min_; q <= q_max_; ++q) as_ladders_.push_back(as_depths(reference, q));
}

StrategyDecision ReferenceStrategy::decide(double /*t*/, long q, int /*l*/) const {
    const int node_q = static_cast<int>(std::clamp<long>(q, q_min_, q_max_));
    return {as_ladders_[static_cast<std::size_t>(node_q - q_min_)], false, node_q != q};
}

}  // namespace ixmm
