#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ohca/error.hpp"

namespace ohca {

// One observation slot of a base station.
struct TrafficSample {
  std::int64_t slot = 0;
  double busy_seconds = 0.0;
  std::uint64_t packets = 0;
};

struct TrafficTrace {
  std::size_t station_id = 0;
  double window_length = 1.0;  // seconds per slot
  std::vector<TrafficSample> samples;
};

struct BaseStationStats {
  std::size_t station_id = 0;
  double idle_time = 0.0;
  std::uint64_t packet_count = 0;
};

enum class ProbabilitySource { IdleTime, InversePacketCount, External };

inline constexpr double kNormalizationTolerance = 1e-9;

// Per-cell probabilities summing to one. Construction validates the invariant,
// so every instance in circulation is normalized.
class ProbabilityVector {
 public:
  ProbabilityVector(std::vector<double> values, ProbabilitySource source = ProbabilitySource::External)
      : values_(std::move(values)), source_(source) {
    if (values_.empty()) throw Error(ErrorKind::DimensionMismatch, "probability vector is empty");
    double sum = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kNormalizationTolerance)
        throw Error(ErrorKind::InvalidArgument, "probability out of [0,1]: " + std::to_string(v));
      sum += v;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance)
      throw Error(ErrorKind::InvalidArgument, "probabilities sum to " + std::to_string(sum));
  }

  // Normalizes nonnegative weights into a probability vector.
  static ProbabilityVector from_weights(std::span<const double> weights,
                                        ProbabilitySource source = ProbabilitySource::External) {
    double total = 0.0;
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0)
        throw Error(ErrorKind::InvalidArgument, "weight must be finite and nonnegative");
      total += w;
    }
    if (total <= 0.0) throw Error(ErrorKind::DegenerateTraffic, "weights sum to zero");
    std::vector<double> values(weights.size());
    std::transform(weights.begin(), weights.end(), values.begin(), [total](double w) { return w / total; });
    return ProbabilityVector(std::move(values), source);
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  ProbabilitySource source() const noexcept { return source_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

 private:
  std::vector<double> values_;
  ProbabilitySource source_;
};

struct ChannelBounds {
  std::int64_t l_min = 1;
  std::int64_t l_max = 1;

  ChannelBounds() = default;
  ChannelBounds(std::int64_t lo, std::int64_t hi) : l_min(lo), l_max(hi) {
    if (lo < 1 || hi < lo)
      throw Error(ErrorKind::InvalidArgument,
                  "channel bounds need 1 <= l_min <= l_max, got (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ")");
  }

  friend bool operator==(const ChannelBounds&, const ChannelBounds&) = default;
};

inline void validate_trace(const TrafficTrace& trace) {
  if (!(trace.window_length > 0.0))
    throw Error(ErrorKind::InvalidTrace, "window_length must be positive");
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    const auto& s = trace.samples[k];
    if (!(s.busy_seconds >= 0.0) || s.busy_seconds > trace.window_length)
      throw Error(ErrorKind::InvalidTrace, "station " + std::to_string(trace.station_id) + " slot " +
                                               std::to_string(s.slot) + ": busy_seconds outside [0, window]");
    if (k > 0 && s.slot <= trace.samples[k - 1].slot)
      throw Error(ErrorKind::InvalidTrace,
                  "station " + std::to_string(trace.station_id) + ": slot indices must be strictly increasing");
  }
}

inline BaseStationStats summarize_trace(const TrafficTrace& trace) {
  if (trace.samples.empty())
    throw Error(ErrorKind::EmptyTrace, "station " + std::to_string(trace.station_id) + " has no samples");
  validate_trace(trace);
  BaseStationStats stats{trace.station_id, 0.0, 0};
  for (const auto& s : trace.samples) {
    stats.idle_time += trace.window_length - s.busy_seconds;
    stats.packet_count += s.packets;
  }
  return stats;
}

// p_i = t_i / sum_j t_j
inline ProbabilityVector idle_time_probabilities(std::span<const BaseStationStats> stats) {
  if (stats.empty()) throw Error(ErrorKind::DimensionMismatch, "no base stations");
  std::vector<double> idle(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!(stats[i].idle_time >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative idle time");
    idle[i] = stats[i].idle_time;
  }
  if (std::all_of(idle.begin(), idle.end(), [](double t) { return t == 0.0; }))
    throw Error(ErrorKind::DegenerateTraffic, "every station has zero idle time");
  return ProbabilityVector::from_weights(idle, ProbabilitySource::IdleTime);
}

// p_i = (1/D_i) / sum_j (1/D_j)
inline ProbabilityVector inverse_packet_count_probabilities(std::span<const BaseStationStats> stats) {
  if (stats.empty()) throw Error(ErrorKind::DimensionMismatch, "no base stations");
  std::vector<double> inverse(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (stats[i].packet_count == 0)
      throw Error(ErrorKind::ZeroPacketCount, "station " + std::to_string(i) + " has zero packets");
    inverse[i] = 1.0 / static_cast<double>(stats[i].packet_count);
  }
  return ProbabilityVector::from_weights(inverse, ProbabilitySource::InversePacketCount);
}

// Trace-driven fallback for the channel bounds: min/max of observed peak demand,
// floored at one channel.
inline ChannelBounds estimate_channel_bounds(std::span<const std::int64_t> per_slot_peak_demand) {
  if (per_slot_peak_demand.empty()) throw Error(ErrorKind::EmptyTrace, "no demand samples");
  auto [lo, hi] = std::minmax_element(per_slot_peak_demand.begin(), per_slot_peak_demand.end());
  if (*lo < 0) throw Error(ErrorKind::InvalidArgument, "negative demand");
  const std::int64_t l_min = std::max<std::int64_t>(1, *lo);
  return ChannelBounds(l_min, std::max(l_min, *hi));
}

}  // namespace ohca
