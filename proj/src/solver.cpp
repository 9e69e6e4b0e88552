#include "ixmm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ixmm {

namespace {

constexpr char kSurfaceMagic[8] = {'I', 'X', 'M', 'M', 'S', 'U', 'R', 'F'};
constexpr std::uint32_t kSurfaceVersion = 1;

double terminal_value(double alpha, int q) { return -(alpha * static_cast<double>(q * q)); }

}  // namespace

double stability_product(const MarketParams& market, const InternalOrderParams& internal,
                         double dt) {
    double rate = market.total_base_intensity();
    if (internal.enabled) rate += internal.nu + internal.mu;
    return dt * rate;
}

SolverGrid SolverGrid::make(const MarketParams& market, const InternalOrderParams& internal,
                            double dt, int q_min, int q_max) {
    market.validate();
    internal.validate();
    if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
    if (!(q_min < 0 && q_max > 0)) throw ConfigError("solver: need q_min < 0 < q_max");
    const double steps = market.horizon / dt;
    const auto n_t = static_cast<std::int64_t>(std::llround(steps));
    if (n_t < 1 || std::abs(static_cast<double>(n_t) * dt - market.horizon) > 1e-9 * market.horizon)
        throw ConfigError("solver: horizon is not an integer multiple of dt");
    const double product = stability_product(market, internal, dt);
    if (!(product < 1.0)) {
        std::ostringstream msg;
        msg << "solver: explicit scheme unstable, dt * total intensity = " << product << " >= 1";
        throw ConfigError(msg.str());
    }
    SolverGrid g;
    g.dt = dt;
    g.n_t = n_t;
    g.q_min = q_min;
    g.q_max = q_max;
    g.lbar = internal.max_level();
    return g;
}

// ---------------------------------------------------------------------------
// ValueSurface / ExecutionRegion

ValueSurface::ValueSurface(SolverGrid grid, MarketParams market, InternalOrderParams internal)
    : grid_(grid),
      market_(std::move(market)),
      internal_(internal),
      values_(static_cast<std::size_t>(grid.n_t + 1) * grid.level_size(), 0.0) {}

ValueSurface::ValueSurface(SolverGrid grid, MarketParams market, InternalOrderParams internal,
                           std::vector<double> values)
    : grid_(grid), market_(std::move(market)), internal_(internal), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(grid.n_t + 1) * grid.level_size())
        throw std::invalid_argument("value surface: data size does not match grid");
}

void ValueSurface::check(std::int64_t level, int q, int l) const {
    if (level < 0 || level > grid_.n_t || !grid_.has_q(q) || l < 0 || l > grid_.lbar)
        throw std::domain_error("value surface: node (" + std::to_string(level) + ", " +
                                std::to_string(q) + ", " + std::to_string(l) + ") is off-grid");
}

double ValueSurface::h(std::int64_t level, int q, int l) const {
    check(level, q, l);
    return values_[static_cast<std::size_t>(level) * grid_.level_size() + grid_.node(q, l)];
}

std::span<const double> ValueSurface::level(std::int64_t level) const {
    if (level < 0 || level > grid_.n_t) throw std::domain_error("value surface: level off-grid");
    return {values_.data() + static_cast<std::size_t>(level) * grid_.level_size(),
            grid_.level_size()};
}

std::span<double> ValueSurface::level(std::int64_t level) {
    if (level < 0 || level > grid_.n_t) throw std::domain_error("value surface: level off-grid");
    return {values_.data() + static_cast<std::size_t>(level) * grid_.level_size(),
            grid_.level_size()};
}

ExecutionRegion::ExecutionRegion(const SolverGrid& grid)
    : grid_(grid), flags_(static_cast<std::size_t>(grid.n_t + 1) * grid.level_size(), 0) {}

bool ExecutionRegion::contains(std::int64_t level, int q, int l) const {
    if (level < 0 || level > grid_.n_t || !grid_.has_q(q) || l < 0 || l > grid_.lbar)
        throw std::domain_error("execution region: node off-grid");
    return flags_[static_cast<std::size_t>(level) * grid_.level_size() + grid_.node(q, l)] != 0;
}

void ExecutionRegion::set(std::int64_t level, int q, int l, bool in_region) {
    flags_[static_cast<std::size_t>(level) * grid_.level_size() + grid_.node(q, l)] =
        in_region ? 1 : 0;
}

std::optional<int> ExecutionRegion::boundary(std::int64_t level, int l) const {
    for (int q = grid_.q_max; q >= grid_.q_min; --q)
        if (contains(level, q, l)) return q;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scheme

namespace detail {

double rhs_on_slice(std::span<const double> slice, const SolverGrid& grid,
                    const MarketParams& market, const InternalOrderParams& internal, int q,
                    int l) {
    const double here = slice[grid.node(q, l)];
    double rhs = -(market.phi * static_cast<double>(q * q));
    if (internal.enabled) rhs -= market.psi * static_cast<double>(l);

    // Feedback-form Hamiltonians. Bid fills move q up, ask fills move it
    // down; sizes whose destination leaves the grid are not quoted. The bid
    // and ask terms of one size are added together first so that the sum is
    // bitwise symmetric under q -> -q, bid <-> ask.
    double hamiltonian = 0.0;
    for (const auto& s : market.sizes) {
        const double scale = s.kappa / s.size;
        const double unit = static_cast<double>(s.size) * std::exp(-1.0) / s.kappa;
        double pair = 0.0;
        if (q + s.size <= grid.q_max)
            pair += unit * s.lambda_bid * std::exp(scale * (slice[grid.node(q + s.size, l)] - here));
        if (q - s.size >= grid.q_min)
            pair += unit * s.lambda_ask * std::exp(scale * (slice[grid.node(q - s.size, l)] - here));
        hamiltonian += pair;
    }
    rhs += hamiltonian;

    if (internal.enabled) {
        // Cancellation removes the whole remaining order (l -> 0); arrivals
        // only happen while no order is present.
        if (l > 0)
            rhs += internal.nu * (slice[grid.node(q, 0)] - here);
        else
            rhs += internal.mu * (slice[grid.node(q, grid.lbar)] - here);
    }
    return rhs;
}

double intervention_on_slice(std::span<const double> slice, const SolverGrid& grid,
                             const InternalOrderParams& internal, int q, int l) {
    const double rho = effective_offset(internal);
    if (l == 1) {
        // Last unit taken: replenished to lbar with probability p.
        return internal.p * slice[grid.node(q + 1, grid.lbar)] +
               (1.0 - internal.p) * slice[grid.node(q + 1, 0)] - rho;
    }
    return slice[grid.node(q + 1, l - 1)] - rho;
}

}  // namespace detail

double continuation_rhs(const ValueSurface& surface, std::int64_t level, int q, int l) {
    surface.h(level, q, l);  // bounds check
    return detail::rhs_on_slice(surface.level(level), surface.grid(), surface.market(),
                                surface.internal(), q, l);
}

double intervention_value(const ValueSurface& surface, std::int64_t level, int q, int l) {
    surface.h(level, q, l);
    if (!surface.internal().enabled || l < 1)
        throw std::domain_error("intervention: no internal liquidity at l = " + std::to_string(l));
    if (q + 1 > surface.grid().q_max)
        throw std::domain_error("intervention: q + 1 leaves the inventory grid");
    return detail::intervention_on_slice(surface.level(level), surface.grid(), surface.internal(),
                                         q, l);
}

SolvedModel solve(const MarketParams& market, const InternalOrderParams& internal,
                  const SolverGrid& grid) {
    market.validate();
    internal.validate();
    if (grid.lbar != internal.max_level())
        throw ConfigError("solver: grid liquidity levels do not match the order model");
    if (!(stability_product(market, internal, grid.dt) < 1.0))
        throw ConfigError("solver: explicit scheme unstable for this dt");
    if (std::abs(static_cast<double>(grid.n_t) * grid.dt - market.horizon) > 1e-9 * market.horizon)
        throw ConfigError("solver: n_t * dt does not equal the horizon");

    SolvedModel out{ValueSurface(grid, market, internal), ExecutionRegion(grid)};
    ValueSurface& surface = out.surface;

    {
        auto terminal = surface.level(grid.n_t);
        for (int q = grid.q_min; q <= grid.q_max; ++q)
            for (int l = 0; l <= grid.lbar; ++l) terminal[grid.node(q, l)] = terminal_value(market.alpha, q);
    }

    std::vector<double> continuation(grid.level_size());
    for (std::int64_t n = grid.n_t - 1; n >= 0; --n) {
        std::span<const double> next = surface.level(n + 1);
        std::span<double> cur = surface.level(n);

        for (int q = grid.q_min; q <= grid.q_max; ++q) {
            for (int l = 0; l <= grid.lbar; ++l) {
                const auto k = grid.node(q, l);
                continuation[k] = next[k] + grid.dt * detail::rhs_on_slice(next, grid, market, internal, q, l);
                cur[k] = continuation[k];
            }
        }

        if (internal.enabled) {
            // Impulses are instantaneous, so the obstacle reads the current
            // level. It only looks at q + 1, hence sweeping q downwards
            // settles in one pass; the loop confirms the fixed point.
            bool changed = true;
            while (changed) {
                changed = false;
                for (int q = grid.q_max - 1; q >= grid.q_min; --q) {
                    for (int l = 1; l <= grid.lbar; ++l) {
                        const auto k = grid.node(q, l);
                        const double iv = detail::intervention_on_slice(cur, grid, internal, q, l);
                        if (iv > cur[k]) {
                            cur[k] = iv;
                            changed = true;
                        }
                    }
                }
            }
            for (int q = grid.q_min; q < grid.q_max; ++q)
                for (int l = 1; l <= grid.lbar; ++l)
                    out.region.set(n, q, l,
                                   detail::intervention_on_slice(cur, grid, internal, q, l) >=
                                       continuation[grid.node(q, l)]);
        }

        for (double v : cur)
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "solver: non-finite value at time " << grid.time(n);
                throw NumericalError(msg.str());
            }
    }
    return out;
}

SolvedModel solve(const MarketParams& market, const InternalOrderParams& internal,
                  const SolverSettings& settings) {
    return solve(market, internal,
                 SolverGrid::make(market, internal, settings.dt, settings.q_min, settings.q_max));
}

double optimal_depth(const ValueSurface& surface, std::int64_t level, int q, int l, Side side,
                     int size) {
    const auto& s = surface.market().at_size(size);
    const int dest = side == Side::Bid ? q + size : q - size;
    if (!surface.grid().has_q(dest))
        throw std::domain_error("optimal depth: destination inventory leaves the grid");
    return 1.0 / s.kappa + (surface.h(level, q, l) - surface.h(level, dest, l)) / size;
}

double qvi_residual(const ValueSurface& surface) {
    const auto& grid = surface.grid();
    const auto& market = surface.market();
    const auto& internal = surface.internal();
    double worst = 0.0;
    auto record = [&worst](double violation, double value) {
        const double scaled = std::abs(violation) / std::max(1.0, std::abs(value));
        if (!(scaled <= worst)) worst = scaled;  // also propagates NaN
    };

    auto terminal = surface.level(grid.n_t);
    for (int q = grid.q_min; q <= grid.q_max; ++q)
        for (int l = 0; l <= grid.lbar; ++l) {
            const double v = terminal[grid.node(q, l)];
            record(v - terminal_value(market.alpha, q), v);
        }

    for (std::int64_t n = grid.n_t - 1; n >= 0; --n) {
        auto next = surface.level(n + 1);
        auto cur = surface.level(n);
        for (int q = grid.q_min; q <= grid.q_max; ++q) {
            for (int l = 0; l <= grid.lbar; ++l) {
                const auto k = grid.node(q, l);
                const double cont = next[k] + grid.dt * detail::rhs_on_slice(next, grid, market, internal, q, l);
                double violation = cont - cur[k];
                if (internal.enabled && l >= 1 && q < grid.q_max)
                    violation = std::max(violation,
                                         detail::intervention_on_slice(cur, grid, internal, q, l) - cur[k]);
                record(violation, cur[k]);
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Serialisation

void write_surface_binary(const ValueSurface& surface, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const auto& g = surface.grid();
    const std::int32_t q_min = g.q_min, q_max = g.q_max, lbar = g.lbar;
    out.write(kSurfaceMagic, sizeof kSurfaceMagic);
    out.write(reinterpret_cast<const char*>(&kSurfaceVersion), sizeof kSurfaceVersion);
    out.write(reinterpret_cast<const char*>(&g.dt), sizeof g.dt);
    out.write(reinterpret_cast<const char*>(&g.n_t), sizeof g.n_t);
    out.write(reinterpret_cast<const char*>(&q_min), sizeof q_min);
    out.write(reinterpret_cast<const char*>(&q_max), sizeof q_max);
    out.write(reinterpret_cast<const char*>(&lbar), sizeof lbar);
    const auto& v = surface.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<double> read_surface_binary(const std::filesystem::path& path, SolverGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[8];
    std::uint32_t version = 0;
    std::int32_t q_min = 0, q_max = 0, lbar = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || std::memcmp(magic, kSurfaceMagic, sizeof magic) != 0 || version != kSurfaceVersion)
        throw std::runtime_error(path.string() + " is not a surface dump");
    in.read(reinterpret_cast<char*>(&grid.dt), sizeof grid.dt);
    in.read(reinterpret_cast<char*>(&grid.n_t), sizeof grid.n_t);
    in.read(reinterpret_cast<char*>(&q_min), sizeof q_min);
    in.read(reinterpret_cast<char*>(&q_max), sizeof q_max);
    in.read(reinterpret_cast<char*>(&lbar), sizeof lbar);
    if (!in || grid.n_t < 1 || q_min >= q_max || lbar < 0)
        throw std::runtime_error(path.string() + ": corrupt header");
    grid.q_min = q_min;
    grid.q_max = q_max;
    grid.lbar = lbar;
    std::vector<double> values(static_cast<std::size_t>(grid.n_t + 1) * grid.level_size());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path.string() + ": truncated surface data");
    return values;
}

void write_surface_csv(const ValueSurface& surface, const std::filesystem::path& path,
                       std::int64_t level_stride) {
    if (level_stride < 1) throw std::invalid_argument("level stride must be >= 1");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    const auto& g = surface.grid();
    out << "t_level,q,l,h\n" << std::setprecision(17);
    for (std::int64_t n = 0; n <= g.n_t; ++n) {
        if (n % level_stride != 0 && n != g.n_t) continue;
        auto slice = surface.level(n);
        for (int q = g.q_min; q <= g.q_max; ++q)
            for (int l = 0; l <= g.lbar; ++l) out << n << ',' << q << ',' << l << ',' << slice[g.node(q, l)] << '\n';
    }
}

}  // namespace ixmm
