#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "ohca/allocation.hpp"
#include "ohca/error.hpp"
#include "ohca/random.hpp"
#include "ohca/traffic.hpp"

namespace ohca {

struct ScenarioConfig {
  std::size_t cells = 1;  // M
  std::int64_t total_channels = 1;
  Rational fixed_fraction{3, 4};
  std::vector<double> arrival_rate_per_cell;  // calls per second
  double mean_holding_time = 1.0;             // seconds
  double sim_duration = 1.0;                  // seconds
  std::uint64_t seed = 1;
  // Optional allocator inputs carried with the scenario.
  std::optional<ChannelBounds> bounds;
  Direction direction = Direction::Minimize;
};

inline void validate_scenario(const ScenarioConfig& s) {
  if (s.cells < 1) throw Error(ErrorKind::InvalidArgument, "scenario needs at least one cell");
  if (s.total_channels < 1) throw Error(ErrorKind::InvalidArgument, "total_channels must be positive");
  if (s.arrival_rate_per_cell.size() != s.cells)
    throw Error(ErrorKind::DimensionMismatch, "arrival_rate_per_cell has " +
                                                  std::to_string(s.arrival_rate_per_cell.size()) + " entries for " +
                                                  std::to_string(s.cells) + " cells");
  for (double r : s.arrival_rate_per_cell)
    if (!std::isfinite(r) || r < 0.0) throw Error(ErrorKind::InvalidArgument, "arrival rates must be >= 0");
  if (!(s.mean_holding_time > 0.0) || !std::isfinite(s.mean_holding_time))
    throw Error(ErrorKind::InvalidArgument, "mean_holding_time must be positive");
  if (!(s.sim_duration > 0.0) || !std::isfinite(s.sim_duration))
    throw Error(ErrorKind::InvalidArgument, "sim_duration must be positive");
  if (s.fixed_fraction.den <= 0 || s.fixed_fraction.num < 0 || s.fixed_fraction.num > s.fixed_fraction.den)
    throw Error(ErrorKind::InvalidArgument, "fixed_fraction must lie in [0, 1]");
}

struct ChannelSplit {
  std::int64_t fixed = 0;
  std::int64_t dynamic = 0;

  friend bool operator==(const ChannelSplit&, const ChannelSplit&) = default;
};

// fixed = round-half-up(total * fraction), the rest is the dynamic pool.
inline ChannelSplit split_channels(std::int64_t total, Rational fixed_fraction) {
  if (total < 1) throw Error(ErrorKind::InvalidArgument, "total channels must be positive");
  if (fixed_fraction.den <= 0 || fixed_fraction.num < 0 || fixed_fraction.num > fixed_fraction.den)
    throw Error(ErrorKind::InvalidArgument, "fixed fraction must lie in [0, 1]");
  const __int128 twice = static_cast<__int128>(2) * total * fixed_fraction.num + fixed_fraction.den;
  const auto fixed = static_cast<std::int64_t>(twice / (2 * static_cast<__int128>(fixed_fraction.den)));
  return {fixed, total - fixed};
}

// Erlang-B blocking via B(E,0) = 1, B(E,c) = E*B(E,c-1) / (c + E*B(E,c-1)).
inline double erlang_b(double offered_erlangs, std::int64_t channels) {
  if (!(offered_erlangs >= 0.0)) throw Error(ErrorKind::InvalidArgument, "offered load must be >= 0");
  if (channels < 0) throw Error(ErrorKind::InvalidArgument, "channel count must be >= 0");
  double b = 1.0;
  for (std::int64_t c = 1; c <= channels; ++c) b = offered_erlangs * b / (static_cast<double>(c) + offered_erlangs * b);
  return b;
}

struct CellState {
  std::int64_t fixed_capacity = 0;
  std::int64_t fixed_busy = 0;
  std::int64_t dynamic_held = 0;
};

struct CellMetrics {
  std::int64_t offered = 0;
  std::int64_t blocked = 0;
  std::int64_t completed = 0;

  std::int64_t in_progress() const { return offered - blocked - completed; }
  double blocking_probability() const {
    return offered == 0 ? 0.0 : static_cast<double>(blocked) / static_cast<double>(offered);
  }

  friend bool operator==(const CellMetrics&, const CellMetrics&) = default;
};

struct SimMetrics {
  std::vector<CellMetrics> cells;
  std::int64_t pool_size = 0;
  std::int64_t peak_pool_occupancy = 0;
  double mean_pool_occupancy = 0.0;  // time average over the run

  std::int64_t total_offered() const {
    return std::accumulate(cells.begin(), cells.end(), std::int64_t{0},
                           [](std::int64_t acc, const CellMetrics& c) { return acc + c.offered; });
  }
  std::int64_t total_blocked() const {
    return std::accumulate(cells.begin(), cells.end(), std::int64_t{0},
                           [](std::int64_t acc, const CellMetrics& c) { return acc + c.blocked; });
  }
  double overall_blocking() const {
    const auto offered = total_offered();
    return offered == 0 ? 0.0 : static_cast<double>(total_blocked()) / static_cast<double>(offered);
  }

  friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

// State handed to an observer after every processed event.
struct SimSnapshot {
  double time = 0.0;
  std::span<const CellState> cells;
  std::int64_t pool_free = 0;
  std::int64_t pool_size = 0;
};

using SimObserver = std::function<void(const SimSnapshot&)>;

namespace detail {

struct Event {
  double time;
  std::uint64_t seq;
  bool arrival;
  std::size_t cell;
  bool from_pool;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    return x.time != y.time ? x.time > y.time : x.seq > y.seq;
  }
};

}  // namespace detail

// Hybrid channel allocation: each cell first uses its fixed channels, then
// borrows from the shared pool; blocked calls are lost. Borrowed channels go
// back to the pool when the call ends. Arrivals are Poisson per cell, holding
// times exponential; each cell draws from its own stream derived from
// (seed, cell), so the arrival sequence does not depend on the plan.
inline SimMetrics run_hca_simulation(const ScenarioConfig& scenario, const AllocationPlan& plan,
                                     std::int64_t dynamic_pool, const SimObserver& observer = {}) {
  validate_scenario(scenario);
  if (plan.counts.size() != scenario.cells)
    throw Error(ErrorKind::DimensionMismatch, "plan has " + std::to_string(plan.counts.size()) +
                                                  " cells, scenario " + std::to_string(scenario.cells));
  if (dynamic_pool < 0) throw Error(ErrorKind::InvalidArgument, "dynamic pool must be >= 0");
  for (auto n : plan.counts)
    if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative channel count in plan");
  const auto split = split_channels(scenario.total_channels, scenario.fixed_fraction);
  if (plan.assigned() > split.fixed)
    throw Error(ErrorKind::SeriesExceedsBudget, "plan assigns " + std::to_string(plan.assigned()) +
                                                    " fixed channels, scenario has " + std::to_string(split.fixed));

  const std::size_t m = scenario.cells;
  std::vector<CellState> state(m);
  for (std::size_t i = 0; i < m; ++i) state[i].fixed_capacity = plan.counts[i];

  SimMetrics metrics;
  metrics.cells.resize(m);
  metrics.pool_size = dynamic_pool;
  std::int64_t pool_free = dynamic_pool;

  std::vector<RandomStream> streams;
  streams.reserve(m);
  for (std::size_t i = 0; i < m; ++i) streams.emplace_back(scenario.seed, i);

  std::priority_queue<detail::Event, std::vector<detail::Event>, detail::EventLater> queue;
  std::uint64_t seq = 0;
  auto schedule_arrival = [&](std::size_t cell, double now) {
    const double rate = scenario.arrival_rate_per_cell[cell];
    if (rate <= 0.0) return;
    const double t = now + streams[cell].exponential(1.0 / rate);
    if (t < scenario.sim_duration) queue.push({t, seq++, true, cell, false});
  };
  for (std::size_t i = 0; i < m; ++i) schedule_arrival(i, 0.0);

  double occupancy_area = 0.0;
  double last_time = 0.0;
  while (!queue.empty() && queue.top().time < scenario.sim_duration) {
    const detail::Event ev = queue.top();
    queue.pop();
    occupancy_area += static_cast<double>(dynamic_pool - pool_free) * (ev.time - last_time);
    last_time = ev.time;

    auto& cell = state[ev.cell];
    auto& stats = metrics.cells[ev.cell];
    if (ev.arrival) {
      ++stats.offered;
      // the holding time is drawn for every call so blocking never shifts the stream
      const double holding = streams[ev.cell].exponential(scenario.mean_holding_time);
      if (cell.fixed_busy < cell.fixed_capacity) {
        ++cell.fixed_busy;
        queue.push({ev.time + holding, seq++, false, ev.cell, false});
      } else if (pool_free > 0) {
        --pool_free;
        ++cell.dynamic_held;
        metrics.peak_pool_occupancy = std::max(metrics.peak_pool_occupancy, dynamic_pool - pool_free);
        queue.push({ev.time + holding, seq++, false, ev.cell, true});
      } else {
        ++stats.blocked;
      }
      schedule_arrival(ev.cell, ev.time);
    } else {
      ++stats.completed;
      if (ev.from_pool) {
        --cell.dynamic_held;
        ++pool_free;
      } else {
        --cell.fixed_busy;
      }
    }
    if (observer) observer(SimSnapshot{ev.time, state, pool_free, dynamic_pool});
  }
  occupancy_area += static_cast<double>(dynamic_pool - pool_free) * (scenario.sim_duration - last_time);
  metrics.mean_pool_occupancy = occupancy_area / scenario.sim_duration;
  return metrics;
}

// Probability vector implied by a scenario: inverse expected packet count,
// with expected packets = rate * duration per cell.
inline ProbabilityVector scenario_probabilities(const ScenarioConfig& scenario) {
  validate_scenario(scenario);
  std::vector<double> inverse(scenario.cells);
  for (std::size_t i = 0; i < scenario.cells; ++i) {
    const double expected = scenario.arrival_rate_per_cell[i] * scenario.sim_duration;
    if (!(expected > 0.0))
      throw Error(ErrorKind::ZeroPacketCount, "station " + std::to_string(i) + " has zero offered traffic");
    inverse[i] = 1.0 / expected;
  }
  return ProbabilityVector::from_weights(inverse, ProbabilitySource::InversePacketCount);
}

// Scenario bounds if given, else min/max of per-cell offered Erlangs (rounded).
inline ChannelBounds scenario_bounds(const ScenarioConfig& scenario) {
  if (scenario.bounds) return *scenario.bounds;
  validate_scenario(scenario);
  std::vector<std::int64_t> demand(scenario.cells);
  for (std::size_t i = 0; i < scenario.cells; ++i)
    demand[i] = std::llround(scenario.arrival_rate_per_cell[i] * scenario.mean_holding_time);
  return estimate_channel_bounds(demand);
}

struct EvaluationSummary {
  double mean_blocking = 0.0;
  double std_blocking = 0.0;  // sample standard deviation; 0 for one seed
  double objective = 0.0;
  std::vector<SimMetrics> runs;
};

inline EvaluationSummary evaluate_plan(const ScenarioConfig& scenario, const AllocationPlan& plan,
                                       std::int64_t dynamic_pool, std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidArgument, "at least one seed is required");
  EvaluationSummary summary;
  summary.objective = average_allocation(plan, scenario_probabilities(scenario));
  ScenarioConfig run = scenario;
  std::vector<double> blocking;
  for (auto seed : seeds) {
    run.seed = seed;
    summary.runs.push_back(run_hca_simulation(run, plan, dynamic_pool));
    blocking.push_back(summary.runs.back().overall_blocking());
  }
  // shifted by the first run so identical runs give exactly zero spread
  const double n = static_cast<double>(blocking.size());
  const double shift = blocking.front();
  double mean_offset = 0.0;
  for (double b : blocking) mean_offset += b - shift;
  mean_offset /= n;
  summary.mean_blocking = shift + mean_offset;
  if (blocking.size() > 1) {
    double ss = 0.0;
    for (double b : blocking) ss += (b - shift - mean_offset) * (b - shift - mean_offset);
    summary.std_blocking = std::sqrt(ss / (n - 1.0));
  }
  return summary;
}

}  // namespace ohca
