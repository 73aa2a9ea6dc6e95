#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ohca/error.hpp"
#include "ohca/traffic.hpp"

namespace ohca {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational reduced(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
    if (d < 0) n = -n, d = -d;
    const std::int64_t g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

enum class Strategy { ApCase1, ApCase2, ApCase3, GpCase4, SourceCoding, UniformFca };

enum class Direction { Minimize, Maximize };

inline constexpr std::string_view to_token(Strategy s) noexcept {
  switch (s) {
    case Strategy::ApCase1: return "ap1";
    case Strategy::ApCase2: return "ap2";
    case Strategy::ApCase3: return "ap3";
    case Strategy::GpCase4: return "gp4";
    case Strategy::SourceCoding: return "source";
    case Strategy::UniformFca: return "uniform";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view token) {
  for (Strategy s : {Strategy::ApCase1, Strategy::ApCase2, Strategy::ApCase3, Strategy::GpCase4,
                     Strategy::SourceCoding, Strategy::UniformFca}) {
    if (token == to_token(s)) return s;
  }
  throw Error(ErrorKind::UnknownStrategy, "unknown strategy '" + std::string(token) + "'");
}

inline constexpr std::string_view to_token(Direction d) noexcept {
  return d == Direction::Minimize ? "min" : "max";
}

inline Direction parse_direction(std::string_view token) {
  if (token == "min") return Direction::Minimize;
  if (token == "max") return Direction::Maximize;
  throw Error(ErrorKind::InvalidArgument, "direction must be 'min' or 'max', got '" + std::string(token) + "'");
}

// Series parameters; only the fields relevant to the producing strategy are set.
struct StrategyParams {
  std::optional<Rational> c;      // Case-1 scale
  std::optional<std::int64_t> a;  // series start
  std::optional<std::int64_t> d;  // AP difference
  std::optional<std::int64_t> r;  // GP ratio
  std::optional<std::int64_t> k;  // L / gcd multiple

  friend bool operator==(const StrategyParams&, const StrategyParams&) = default;
};

struct AllocationPlan {
  std::vector<std::int64_t> counts;  // indexed by station id
  std::int64_t total_fixed = 0;      // the L budget handed to the allocator
  std::int64_t residual_to_pool = 0;
  Strategy strategy = Strategy::UniformFca;
  StrategyParams params;

  std::int64_t assigned() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

  friend bool operator==(const AllocationPlan&, const AllocationPlan&) = default;
};

// Sum of n_i * p_i: the average number of channels per cell.
inline double average_allocation(std::span<const std::int64_t> counts, const ProbabilityVector& probs) {
  if (counts.size() != probs.size())
    throw Error(ErrorKind::DimensionMismatch, "plan has " + std::to_string(counts.size()) + " cells, probabilities " +
                                                  std::to_string(probs.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) total += static_cast<double>(counts[i]) * probs[i];
  return total;
}

inline double average_allocation(const AllocationPlan& plan, const ProbabilityVector& probs) {
  return average_allocation(plan.counts, probs);
}

// Station indices by descending probability, ties by ascending station id.
inline std::vector<std::size_t> rank_cells(const ProbabilityVector& probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return probs[x] > probs[y]; });
  return order;
}

// Matches a multiset of counts to cells. Minimize gives the most probable cell
// the fewest channels (rearrangement inequality); Maximize reverses that.
inline std::vector<std::int64_t> pair_counts_to_cells(std::span<const std::int64_t> counts,
                                                      const ProbabilityVector& probs, Direction direction) {
  if (counts.size() != probs.size())
    throw Error(ErrorKind::DimensionMismatch, "counts and probabilities differ in length");
  std::vector<std::int64_t> ascending(counts.begin(), counts.end());
  std::sort(ascending.begin(), ascending.end());
  const auto rank = rank_cells(probs);
  const std::size_t m = ascending.size();
  std::vector<std::int64_t> per_station(m);
  for (std::size_t i = 0; i < m; ++i)
    per_station[rank[i]] = direction == Direction::Minimize ? ascending[i] : ascending[m - 1 - i];
  return per_station;
}

// Largest-remainder (Hamilton) apportionment of L units proportional to quotas.
// Extra units go to the largest fractional parts, ties to the lower index. When
// min_one is set every entry ends up >= 1, taking units from the largest entry.
// Ascending quota sequences come back ascending.
inline std::vector<std::int64_t> largest_remainder_round(std::span<const double> quotas, std::int64_t L,
                                                         bool min_one = false) {
  const std::size_t m = quotas.size();
  if (m == 0) throw Error(ErrorKind::DimensionMismatch, "no quotas");
  if (L < 0) throw Error(ErrorKind::InvalidArgument, "negative channel budget");
  double sum = 0.0;
  for (double q : quotas) {
    if (!std::isfinite(q) || q < 0.0) throw Error(ErrorKind::InvalidArgument, "quota must be finite and >= 0");
    sum += q;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::InvalidArgument, "quotas sum to zero");
  if (min_one && L < static_cast<std::int64_t>(m))
    throw Error(ErrorKind::InfeasibleMinimum,
                std::to_string(L) + " channels cannot give each of " + std::to_string(m) + " cells one channel");

  std::vector<std::int64_t> out(m);
  std::vector<double> remainder(m);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double share = quotas[i] * static_cast<double>(L) / sum;
    const double whole = std::floor(share);
    out[i] = static_cast<std::int64_t>(whole);
    remainder[i] = share - whole;
    assigned += out[i];
  }
  // Floating error can push the floors one unit over L; take it back from the smallest remainders.
  while (assigned > L) {
    std::size_t victim = m;
    for (std::size_t i = 0; i < m; ++i)
      if (out[i] > 0 && (victim == m || remainder[i] < remainder[victim])) victim = i;
    --out[victim];
    remainder[victim] += 1.0;
    --assigned;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t k = 0; assigned < L; k = (k + 1) % m, ++assigned) ++out[order[k]];

  if (min_one) {
    for (std::size_t i = 0; i < m; ++i) {
      while (out[i] < 1) {
        // donor: largest entry, highest index on ties
        std::size_t donor = 0;
        for (std::size_t j = 1; j < m; ++j)
          if (out[j] >= out[donor]) donor = j;
        --out[donor];
        ++out[i];
      }
    }
  }

  if (std::is_sorted(quotas.begin(), quotas.end())) {
    // rounding moves each entry by less than one unit, so neighbours are at most one step out of order
    bool swapped = true;
    while (swapped) {
      swapped = false;
      for (std::size_t i = 1; i < m; ++i) {
        if (out[i - 1] > out[i]) {
          std::swap(out[i - 1], out[i]);
          swapped = true;
        }
      }
    }
  }
  return out;
}

}  // namespace ohca
