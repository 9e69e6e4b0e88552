#pragma once

#include "ixmm/solver.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

namespace ixmm {

struct SizeQuote {
    int size = 0;
    std::optional<double> bid;  // half-spread below mid; empty = not quoted
    std::optional<double> ask;  // half-spread above mid

    bool operator==(const SizeQuote&) const = default;
};

// One entry per market size, ascending.
struct QuoteLadder {
    std::vector<SizeQuote> quotes;

    const SizeQuote& at_size(int size) const;
    bool operator==(const QuoteLadder&) const = default;
};

struct StrategyDecision {
    QuoteLadder ladder;
    bool execute_now = false;  // take one unit from the internal order now
    bool clamped = false;      // q was outside the policy grid and was clamped
};

// Anything the simulator can drive: a pure map from state to decision.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual StrategyDecision decide(double t, long q, int l) const = 0;
};

// Optimal quotes and execution flag read from a solved surface at the
// nearest solved level not later than t.
StrategyDecision decide(const SolvedModel& model, double t, long q, int l);

// Ladder from the depth formula at one node; sizes whose destination
// leaves the grid are left unquoted.
QuoteLadder ladder_at(const ValueSurface& surface, std::int64_t level, int q, int l);

// Level used for a query time (floor of t / dt, clamped to the grid).
std::int64_t level_for_time(const SolverGrid& grid, double t);

class TimeDependentPolicy final : public Strategy {
public:
    explicit TimeDependentPolicy(const SolvedModel& model) : model_(&model) {}
    StrategyDecision decide(double t, long q, int l) const override;

private:
    const SolvedModel* model_;
};

// Frozen t = 0 slice: quotes and execute flag per (q, l), time-independent.
class StationaryPolicy final : public Strategy {
public:
    StationaryPolicy() = default;
    explicit StationaryPolicy(const SolvedModel& model);

    StrategyDecision decide(double t, long q, int l) const override;

    int q_min() const { return q_min_; }
    int q_max() const { return q_max_; }
    int lbar() const { return lbar_; }
    const std::vector<int>& sizes() const { return sizes_; }

    const QuoteLadder& ladder(int q, int l) const;
    bool execute(int q, int l) const;

    // Columns: q,l,execute,bid_<z>,ask_<z> for each size (empty when unquoted).
    void write_csv(std::ostream& out) const;

private:
    std::size_t index(int q, int l) const;

    int q_min_ = 0;
    int q_max_ = -1;
    int lbar_ = 0;
    std::vector<int> sizes_;
    std::vector<QuoteLadder> ladders_;
    std::vector<std::uint8_t> execute_;
};

StationaryPolicy stationary_policy(const SolvedModel& model);

// Shared CSV layout for any (q, l) -> decision table.
void write_policy_csv_header(std::ostream& out, const std::vector<int>& sizes);
void write_policy_csv_row(std::ostream& out, int q, int l, const StrategyDecision& decision);

}  // namespace ixmm
