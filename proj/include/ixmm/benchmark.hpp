#pragma once

#include "ixmm/policy.hpp"

#include <vector>

namespace ixmm {

struct BenchmarkConfig {
    double iota = 0.1;       // dealer margin added to the client's price
    double rho_tilde = 0.0;  // client's offset from mid

    void validate() const;
};

// Avellaneda-Stoikov ladder at t = 0 from a surface solved with the internal
// exchange disabled.
QuoteLadder as_depths(const ValueSurface& reference, int q);

struct VwapAdjustment {
    QuoteLadder ladder;
    bool insertion_undefined = false;  // slice price at or above every marginal price
    bool capped = false;               // slice larger than the top ladder size
};

// Inserts a slice of size l at price rho_tilde + iota into the ask ladder and
// reprices every size as the VWAP of its cheapest units. The bid side is
// returned untouched.
VwapAdjustment vwap_adjusted_ask(const QuoteLadder& as_ladder, int l, double rho_tilde,
                                 double iota);

// Take-when-short rule.
bool naive_decision(long q, int l);

class NaiveStrategy final : public Strategy {
public:
    NaiveStrategy(const ValueSurface& reference, BenchmarkConfig config);

    StrategyDecision decide(double t, long q, int l) const override;

    // Decision table over (q, l) in the same CSV layout as StationaryPolicy.
    void write_csv(std::ostream& out, int lbar) const;

private:
    int q_min_;
    int q_max_;
    BenchmarkConfig config_;
    std::vector<int> sizes_;
    std::vector<QuoteLadder> as_ladders_;  // indexed by q - q_min
};

// Quotes the AS ladder and never touches the internal exchange.
class ReferenceStrategy final : public Strategy {
public:
    explicit ReferenceStrategy(const ValueSurface& reference);
    StrategyDecision decide(double t, long q, int l) const override;

private:
    int q_min_;
    int q_max_;
    std::vector<QuoteLadder> as_ladders_;
};

}  // namespace ixmm
