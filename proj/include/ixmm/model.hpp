#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ixmm {

enum class Side { Bid, Ask };

// Client placement algorithm on the internal exchange.
enum class Scenario { Iceberg, TWAP, FullAmount };

std::string_view to_string(Side side);
std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view name);

// Per-size OTC flow parameters: Lambda(delta) = lambda * exp(-kappa * delta).
struct SizeParams {
    int size = 1;
    double lambda_bid = 0.0;
    double lambda_ask = 0.0;
    double kappa = 1.0;
};

// External OTC market and penalty constants. Prices are in one common
// price unit; intensities are per second.
struct MarketParams {
    double sigma = 1.0;
    std::vector<SizeParams> sizes;  // strictly increasing by size
    double alpha = 0.0;             // terminal inventory penalty
    double phi = 0.0;               // running inventory penalty
    double psi = 0.0;               // running penalty on unfilled internal order
    double horizon = 300.0;         // seconds

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    const SizeParams& at_size(int size) const;  // std::domain_error if unknown
    std::vector<int> size_list() const;
    int max_size() const;

    // Sum of base intensities over both sides and all sizes.
    double total_base_intensity() const;
};

// Internal-exchange order model. `enabled == false` means no internal
// exchange at all (L identically zero), which gives the Avellaneda-Stoikov
// reference problem exactly.
struct InternalOrderParams {
    bool enabled = true;
    int lbar = 1;            // order size at placement / replenishment
    double nu = 0.0;         // cancellation intensity
    double mu = 0.0;         // arrival intensity (only while no order is present)
    double p = 0.0;          // instantaneous replenishment probability
    double rho_tilde = 0.0;  // client price offset from mid
    double xi = 0.0;         // fee per unit paid to the dealer

    static InternalOrderParams disabled();

    void validate() const;

    // Largest liquidity level represented on a grid (0 when disabled).
    int max_level() const { return enabled ? lbar : 0; }
};

double fill_intensity(Side side, int size, double delta, const MarketParams& params);

// Price offset the dealer actually pays relative to mid: rho_tilde - xi.
double effective_offset(const InternalOrderParams& params);

InternalOrderParams scenario_preset(Scenario name, double rho_tilde, double xi);

// Calibrated GBPUSD constants: sizes {1, 5, 10}, T = 300 s. sigma is not
// part of the calibration and is left at the 1.0 default.
MarketParams paper_market_params();

}  // namespace ixmm
