#include "ixmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ixmm {

std::string_view to_string(Side side) { return side == Side::Bid ? "bid" : "ask"; }

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::Iceberg: return "Iceberg";
        case Scenario::TWAP: return "TWAP";
        case Scenario::FullAmount: return "FullAmount";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name) {
    if (name == "Iceberg") return Scenario::Iceberg;
    if (name == "TWAP") return Scenario::TWAP;
    if (name == "FullAmount") return Scenario::FullAmount;
    throw std::invalid_argument("unknown scenario '" + std::string(name) +
                                "' (expected Iceberg, TWAP or FullAmount)");
}

void MarketParams::validate() const {
    if (sizes.empty()) throw std::invalid_argument("market: no order sizes");
    int prev = 0;
    for (const auto& s : sizes) {
        if (s.size < 1 || s.size <= prev)
            throw std::invalid_argument("market: sizes must be strictly increasing and >= 1");
        // A zero intensity is a size nobody trades; it keeps degenerate
        // no-flow setups expressible.
        if (!(s.lambda_bid >= 0.0) || !(s.lambda_ask >= 0.0))
            throw std::invalid_argument("market: intensities must be non-negative");
        if (!(s.kappa > 0.0)) throw std::invalid_argument("market: kappas must be positive");
        prev = s.size;
    }
    if (!(alpha >= 0.0) || !(phi >= 0.0) || !(psi >= 0.0))
        throw std::invalid_argument("market: penalties must be non-negative");
    if (!(sigma >= 0.0)) throw std::invalid_argument("market: sigma must be non-negative");
    if (!(horizon > 0.0)) throw std::invalid_argument("market: horizon must be positive");
}

const SizeParams& MarketParams::at_size(int size) const {
    auto it = std::find_if(sizes.begin(), sizes.end(),
                           [size](const SizeParams& s) { return s.size == size; });
    if (it == sizes.end())
        throw std::domain_error("order size " + std::to_string(size) + " is not quoted");
    return *it;
}

std::vector<int> MarketParams::size_list() const {
    std::vector<int> out;
    out.reserve(sizes.size());
    for (const auto& s : sizes) out.push_back(s.size);
    return out;
}

int MarketParams::max_size() const { return sizes.empty() ? 0 : sizes.back().size; }

double MarketParams::total_base_intensity() const {
    double total = 0.0;
    for (const auto& s : sizes) total += s.lambda_bid + s.lambda_ask;
    return total;
}

InternalOrderParams InternalOrderParams::disabled() {
    InternalOrderParams p;
    p.enabled = false;
    p.lbar = 0;
    return p;
}

void InternalOrderParams::validate() const {
    if (!(nu >= 0.0) || !(mu >= 0.0)) throw std::invalid_argument("internal: nu, mu must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("internal: p must lie in [0, 1]");
    if (!(xi >= 0.0)) throw std::invalid_argument("internal: fee xi must be >= 0");
    if (!std::isfinite(rho_tilde)) throw std::invalid_argument("internal: rho_tilde must be finite");
    if (enabled && lbar < 1) throw std::invalid_argument("internal: lbar must be >= 1");
}

double fill_intensity(Side side, int size, double delta, const MarketParams& params) {
    const auto& s = params.at_size(size);
    const double base = side == Side::Bid ? s.lambda_bid : s.lambda_ask;
    return base * std::exp(-s.kappa * delta);
}

double effective_offset(const InternalOrderParams& params) { return params.rho_tilde - params.xi; }

InternalOrderParams scenario_preset(Scenario name, double rho_tilde, double xi) {
    InternalOrderParams p;
    p.nu = 0.001;
    p.rho_tilde = rho_tilde;
    p.xi = xi;
    switch (name) {
        case Scenario::Iceberg:
            p.lbar = 1;
            p.mu = 0.0;
            p.p = 0.9;
            break;
        case Scenario::TWAP:
            p.lbar = 1;
            p.mu = 0.05;
            p.p = 0.0;
            break;
        case Scenario::FullAmount:
            p.lbar = 10;
            p.mu = 0.0;
            p.p = 0.0;
            break;
    }
    return p;
}

MarketParams paper_market_params() {
    MarketParams m;
    m.sigma = 1.0;
    m.sizes = {
        {1, 0.2, 0.2, 1.5},
        {5, 0.005, 0.005, 1.0},
        {10, 0.001, 0.001, 0.5},
    };
    m.alpha = 0.001;
    m.phi = 0.001;
    m.psi = 0.01;
    m.horizon = 300.0;
    return m;
}

}  // namespace ixmm
