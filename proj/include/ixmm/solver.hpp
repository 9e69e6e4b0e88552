#pragma once

#include "ixmm/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ixmm {

// Raised for grids that violate the explicit-scheme stability bound or
// are otherwise malformed.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when the backward march produces a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Discretisation of (t, q, l). Time levels are n = 0..n_t with t = n * dt,
// so level n_t is the terminal time. Inventory nodes are the integers in
// [q_min, q_max]; liquidity nodes are 0..lbar.
struct SolverGrid {
    double dt = 0.01;
    std::int64_t n_t = 0;
    int q_min = -30;
    int q_max = 30;
    int lbar = 0;

    // Builds the grid for the given problem; throws ConfigError when the
    // horizon is not a multiple of dt, bounds are malformed, or the
    // stability product is >= 1.
    static SolverGrid make(const MarketParams& market, const InternalOrderParams& internal,
                           double dt, int q_min = -30, int q_max = 30);

    int n_q() const { return q_max - q_min + 1; }
    int n_l() const { return lbar + 1; }
    std::size_t level_size() const { return static_cast<std::size_t>(n_q()) * n_l(); }
    bool has_q(long q) const { return q >= q_min && q <= q_max; }
    double time(std::int64_t level) const { return static_cast<double>(level) * dt; }

    std::size_t node(int q, int l) const {
        return static_cast<std::size_t>(q - q_min) * n_l() + static_cast<std::size_t>(l);
    }
};

// User-facing discretisation choices; SolverGrid::make derives the rest.
struct SolverSettings {
    double dt = 0.01;
    int q_min = -30;
    int q_max = 30;
};

// dt * (sum of base fill intensities + nu + mu). Must be < 1.
double stability_product(const MarketParams& market, const InternalOrderParams& internal,
                         double dt);

// Reduced value function h(t, q, l) on the full grid, stored level-major.
class ValueSurface {
public:
    ValueSurface(SolverGrid grid, MarketParams market, InternalOrderParams internal);
    ValueSurface(SolverGrid grid, MarketParams market, InternalOrderParams internal,
                 std::vector<double> values);

    const SolverGrid& grid() const { return grid_; }
    const MarketParams& market() const { return market_; }
    const InternalOrderParams& internal() const { return internal_; }

    double h(std::int64_t level, int q, int l) const;
    std::span<const double> level(std::int64_t level) const;
    std::span<double> level(std::int64_t level);

    // Raw storage, (level, q, l) row-major.
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    void check(std::int64_t level, int q, int l) const;

    SolverGrid grid_;
    MarketParams market_;
    InternalOrderParams internal_;
    std::vector<double> values_;
};

// Nodes where taking one unit from the internal order is optimal.
class ExecutionRegion {
public:
    explicit ExecutionRegion(const SolverGrid& grid);

    bool contains(std::int64_t level, int q, int l) const;
    void set(std::int64_t level, int q, int l, bool in_region);

    // Largest q in the region at (level, l), if any.
    std::optional<int> boundary(std::int64_t level, int l) const;

    const SolverGrid& grid() const { return grid_; }

private:
    SolverGrid grid_;
    std::vector<std::uint8_t> flags_;
};

struct SolvedModel {
    ValueSurface surface;
    ExecutionRegion region;
};

double continuation_rhs(const ValueSurface& surface, std::int64_t level, int q, int l);
double intervention_value(const ValueSurface& surface, std::int64_t level, int q, int l);

SolvedModel solve(const MarketParams& market, const InternalOrderParams& internal,
                  const SolverGrid& grid);
SolvedModel solve(const MarketParams& market, const InternalOrderParams& internal,
                  const SolverSettings& settings);

double optimal_depth(const ValueSurface& surface, std::int64_t level, int q, int l, Side side,
                     int size);

// Self-consistency of a solved surface against the scheme: the largest
// per-node violation of h = max(continuation, intervention), each scaled by
// max(1, |h|). Also covers the terminal slice.
double qvi_residual(const ValueSurface& surface);

// Binary dump: magic "IXMMSURF", u32 version, f64 dt, i64 n_t, i32 q_min,
// i32 q_max, i32 lbar, then every h value as f64, level-major.
void write_surface_binary(const ValueSurface& surface, const std::filesystem::path& path);
std::vector<double> read_surface_binary(const std::filesystem::path& path, SolverGrid& grid);

// Text dump with columns t_level,q,l,h; every `level_stride`-th level plus
// the terminal one.
void write_surface_csv(const ValueSurface& surface, const std::filesystem::path& path,
                       std::int64_t level_stride = 1);

namespace detail {

// Continuation right-hand side at (q, l) evaluated on one time slice. The
// building block shared by the march and the residual check.
double rhs_on_slice(std::span<const double> slice, const SolverGrid& grid,
                    const MarketParams& market, const InternalOrderParams& internal, int q,
                    int l);

double intervention_on_slice(std::span<const double> slice, const SolverGrid& grid,
                             const InternalOrderParams& internal, int q, int l);

}  // namespace detail

}  // namespace ixmm
