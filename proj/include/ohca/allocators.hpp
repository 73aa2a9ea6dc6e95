#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "ohca/allocation.hpp"
#include "ohca/error.hpp"
#include "ohca/traffic.hpp"

namespace ohca {

// ---------------------------------------------------------------------------
// Linear Diophantine equations  e*x + f*y = g
// ---------------------------------------------------------------------------

struct DiophantineSolution {
  std::int64_t base_x = 0;
  std::int64_t base_y = 0;
  std::int64_t step_x = 0;
  std::int64_t step_y = 0;
  std::int64_t g = 1;  // gcd(e, f)

  std::int64_t x(std::int64_t t) const { return base_x + t * step_x; }
  std::int64_t y(std::int64_t t) const { return base_y + t * step_y; }
};

namespace detail {

// Returns (gcd, u, v) with a*u + b*v = gcd, for a, b >= 0.
inline std::tuple<std::int64_t, std::int64_t, std::int64_t> extended_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t old_r = a, r = b;
  std::int64_t old_u = 1, u = 0;
  std::int64_t old_v = 0, v = 1;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_tuple(r, old_r - q * r);
    std::tie(old_u, u) = std::make_tuple(u, old_u - q * u);
    std::tie(old_v, v) = std::make_tuple(v, old_v - q * v);
  }
  return {old_r, old_u, old_v};
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace detail

// All integer solutions of e*x + f*y = g as a one-parameter family, or nullopt
// when gcd(e, f) does not divide g. The base point is normalized so that
// 0 <= base_x < step_x.
inline std::optional<DiophantineSolution> solve_linear_diophantine(std::int64_t e, std::int64_t f, std::int64_t g) {
  if (e < 1 || f < 1) throw Error(ErrorKind::InvalidArgument, "Diophantine coefficients must be positive");
  const auto [gcd, u, v] = detail::extended_gcd(e, f);
  if (g % gcd != 0) return std::nullopt;
  const std::int64_t scale = g / gcd;
  DiophantineSolution sol;
  sol.g = gcd;
  sol.step_x = f / gcd;
  sol.step_y = -(e / gcd);
  // e*(u*scale) + f*(v*scale) = g; shift along the family to keep numbers small.
  const __int128 x0 = static_cast<__int128>(u) * scale;
  const __int128 y0 = static_cast<__int128>(v) * scale;
  __int128 t = x0 / sol.step_x;
  if (x0 - t * sol.step_x < 0) --t;
  sol.base_x = static_cast<std::int64_t>(x0 - t * sol.step_x);
  sol.base_y = static_cast<std::int64_t>(y0 - t * sol.step_y);
  return sol;
}

// ---------------------------------------------------------------------------
// Arithmetic / geometric progression allocators
// ---------------------------------------------------------------------------

namespace detail {

inline void require_cells(const ProbabilityVector& probs, std::int64_t m) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "need at least one cell");
  if (static_cast<std::int64_t>(probs.size()) != m)
    throw Error(ErrorKind::DimensionMismatch,
                "M = " + std::to_string(m) + " but " + std::to_string(probs.size()) + " probabilities");
}

inline std::vector<std::int64_t> ap_series(std::int64_t a, std::int64_t d, std::int64_t m) {
  std::vector<std::int64_t> s(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = a + i * d;
  return s;
}

inline AllocationPlan finish_plan(std::vector<std::int64_t> series, const ProbabilityVector& probs,
                                  Direction direction, std::int64_t L, Strategy strategy, StrategyParams params) {
  AllocationPlan plan;
  plan.counts = pair_counts_to_cells(series, probs, direction);
  plan.total_fixed = L;
  plan.strategy = strategy;
  plan.params = params;
  const std::int64_t used = plan.assigned();
  if (used > L)
    throw Error(ErrorKind::SeriesExceedsBudget,
                "series needs " + std::to_string(used) + " channels but only " + std::to_string(L) + " exist");
  plan.residual_to_pool = L - used;
  return plan;
}

}  // namespace detail

// Case 1: counts c*1, c*2, ..., c*M with c = 2L / (M^2 + M), rounded to integers.
inline AllocationPlan allocate_ap_case1(std::int64_t M, std::int64_t L, const ProbabilityVector& probs,
                                        Direction direction = Direction::Minimize) {
  detail::require_cells(probs, M);
  if (L < M)
    throw Error(ErrorKind::InfeasibleMinimum,
                std::to_string(L) + " channels for " + std::to_string(M) + " cells");
  std::vector<double> ranks(static_cast<std::size_t>(M));
  std::iota(ranks.begin(), ranks.end(), 1.0);
  StrategyParams params;
  params.c = Rational::reduced(2 * L, M * M + M);
  return detail::finish_plan(largest_remainder_round(ranks, L, true), probs, direction, L, Strategy::ApCase1,
                             params);
}

// Case 2: a = l_min, d = floor((l_max - l_min) / M). Unused channels go to the pool.
inline AllocationPlan allocate_ap_case2(std::int64_t M, std::int64_t L, const ChannelBounds& bounds,
                                        const ProbabilityVector& probs, Direction direction = Direction::Minimize) {
  detail::require_cells(probs, M);
  const std::int64_t a = bounds.l_min;
  const std::int64_t d = (bounds.l_max - bounds.l_min) / M;
  StrategyParams params;
  params.a = a;
  params.d = d;
  return detail::finish_plan(detail::ap_series(a, d, M), probs, direction, L, Strategy::ApCase2, params);
}

// Case 3: solve M*a + M(M-1)/2 * d = L over the integers and keep the admissible
// (a >= 1, d >= 0) solution whose a is nearest l_min; ties go to the smaller a.
inline AllocationPlan allocate_ap_case3(std::int64_t M, std::int64_t L, std::int64_t l_min,
                                        const ProbabilityVector& probs, Direction direction = Direction::Minimize) {
  detail::require_cells(probs, M);
  if (M < 2) throw Error(ErrorKind::InvalidArgument, "case 3 needs at least two cells");
  if (L < 1) throw Error(ErrorKind::InvalidArgument, "channel budget must be positive");
  const std::int64_t e = M;
  const std::int64_t f = M * (M - 1) / 2;
  const auto family = solve_linear_diophantine(e, f, L);
  if (!family) {
    const std::int64_t g = std::gcd(e, f);
    throw Error(ErrorKind::NoFeasibleL,
                "L = " + std::to_string(L) + " is not a multiple of gcd(" + std::to_string(e) + ", " +
                    std::to_string(f) + ") = " + std::to_string(g));
  }
  // a = base_x + t*step_x >= 1 and d = base_y + t*step_y >= 0 (step_x > 0, step_y < 0)
  const std::int64_t t_lo = detail::ceil_div(1 - family->base_x, family->step_x);
  const std::int64_t t_hi = detail::floor_div(family->base_y, -family->step_y);
  if (t_lo > t_hi)
    throw Error(ErrorKind::NoAdmissibleSeries,
                "no series with a >= 1 and d >= 0 sums to " + std::to_string(L) + " over " + std::to_string(M) +
                    " cells");
  std::int64_t best_t = t_lo;
  for (std::int64_t t = t_lo; t <= t_hi; ++t) {
    const std::int64_t gap = std::abs(family->x(t) - l_min);
    const std::int64_t best_gap = std::abs(family->x(best_t) - l_min);
    if (gap < best_gap) best_t = t;  // a grows with t, so the first hit on a tie is the smaller a
  }
  StrategyParams params;
  params.a = family->x(best_t);
  params.d = family->y(best_t);
  params.k = L / family->g;
  return detail::finish_plan(detail::ap_series(*params.a, *params.d, M), probs, direction, L, Strategy::ApCase3,
                             params);
}

// Largest integer r >= 2 with l_max - l_min > l_min * (r^(M-1) - 1), if any.
inline std::optional<std::int64_t> largest_gp_ratio(std::int64_t M, const ChannelBounds& bounds) {
  const std::int64_t spread = bounds.l_max - bounds.l_min;
  auto satisfies = [&](std::int64_t r) {
    // compare l_min * (r^(M-1) - 1) < spread without overflow
    __int128 power = 1;
    for (std::int64_t i = 0; i < M - 1; ++i) {
      power *= r;
      if (power > static_cast<__int128>(spread) + 1) return false;
    }
    return static_cast<__int128>(bounds.l_min) * (power - 1) < spread;
  };
  if (!satisfies(2)) return std::nullopt;
  std::int64_t r = 2;
  while (satisfies(r + 1)) ++r;
  return r;
}

// Case 4: geometric series l_min, l_min*r, ..., l_min*r^(M-1).
inline AllocationPlan allocate_gp_case4(std::int64_t M, std::int64_t L, const ChannelBounds& bounds,
                                        const ProbabilityVector& probs, Direction direction = Direction::Minimize) {
  detail::require_cells(probs, M);
  if (M < 2) throw Error(ErrorKind::InvalidArgument, "case 4 needs at least two cells");
  const auto r = largest_gp_ratio(M, bounds);
  if (!r)
    throw Error(ErrorKind::CaseInapplicable, "no integer ratio r >= 2 fits bounds (" + std::to_string(bounds.l_min) +
                                                 ", " + std::to_string(bounds.l_max) + ")");
  std::vector<std::int64_t> series(static_cast<std::size_t>(M));
  std::int64_t term = bounds.l_min;
  for (auto& s : series) {
    s = term;
    term *= *r;
  }
  StrategyParams params;
  params.a = bounds.l_min;
  params.r = *r;
  return detail::finish_plan(std::move(series), probs, direction, L, Strategy::GpCase4, params);
}

// ---------------------------------------------------------------------------
// Source coding
// ---------------------------------------------------------------------------

// Binary Huffman code length per station. Merges pick the lowest probability
// first, then the subtree holding the lowest station id.
inline std::vector<int> huffman_code_lengths(const ProbabilityVector& probs) {
  const std::size_t m = probs.size();
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "Huffman coding needs at least two symbols");
  for (std::size_t i = 0; i < m; ++i)
    if (probs[i] <= 0.0) throw Error(ErrorKind::ZeroProbability, "station " + std::to_string(i) + " has p = 0");

  struct Node {
    double p;
    std::size_t min_id;
    std::size_t index;
  };
  auto later = [](const Node& x, const Node& y) { return std::tie(x.p, x.min_id) > std::tie(y.p, y.min_id); };
  std::priority_queue<Node, std::vector<Node>, decltype(later)> heap(later);
  std::vector<std::size_t> parent(2 * m - 1, 0);
  for (std::size_t i = 0; i < m; ++i) heap.push({probs[i], i, i});

  std::size_t next = m;
  while (heap.size() > 1) {
    const Node x = heap.top();
    heap.pop();
    const Node y = heap.top();
    heap.pop();
    parent[x.index] = parent[y.index] = next;
    heap.push({x.p + y.p, std::min(x.min_id, y.min_id), next});
    ++next;
  }
  const std::size_t root = next - 1;
  std::vector<int> lengths(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t n = i; n != root; n = parent[n]) ++lengths[i];
  return lengths;
}

// Counts proportional to -log2(p_i), scaled to sum to L.
inline AllocationPlan allocate_source_coding(const ProbabilityVector& probs, std::int64_t L,
                                             Direction direction = Direction::Minimize) {
  const auto m = static_cast<std::int64_t>(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] <= 0.0) throw Error(ErrorKind::ZeroProbability, "station " + std::to_string(i) + " has p = 0");
  if (L < m)
    throw Error(ErrorKind::InfeasibleMinimum, std::to_string(L) + " channels for " + std::to_string(m) + " cells");

  AllocationPlan plan;
  plan.total_fixed = L;
  plan.strategy = Strategy::SourceCoding;
  std::vector<double> weights(probs.size());
  std::transform(probs.begin(), probs.end(), weights.begin(), [](double p) { return -std::log2(p); });
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) {
    plan.counts = {L};  // a single cell with p = 1
    return plan;
  }
  // rounding with the minimum rule can invert the order of near-equal cells
  plan.counts = pair_counts_to_cells(largest_remainder_round(weights, L, true), probs, direction);
  return plan;
}

// ---------------------------------------------------------------------------
// Baseline and dispatch
// ---------------------------------------------------------------------------

// Traditional FCA: L split as evenly as possible, remainder to the lowest ids.
inline AllocationPlan allocate_uniform(std::int64_t M, std::int64_t L) {
  if (M < 1) throw Error(ErrorKind::InvalidArgument, "need at least one cell");
  if (L < 0) throw Error(ErrorKind::InvalidArgument, "negative channel budget");
  AllocationPlan plan;
  plan.counts.assign(static_cast<std::size_t>(M), L / M);
  for (std::int64_t i = 0; i < L % M; ++i) ++plan.counts[static_cast<std::size_t>(i)];
  plan.total_fixed = L;
  plan.strategy = Strategy::UniformFca;
  return plan;
}

struct AllocationRequest {
  Strategy strategy = Strategy::UniformFca;
  std::int64_t channels = 0;  // L
  std::optional<ProbabilityVector> probs;
  std::size_t cells = 0;  // M when probs is absent (uniform only)
  std::optional<ChannelBounds> bounds;
  std::optional<std::int64_t> l_min;  // case 3 target; falls back to bounds, then 1
  Direction direction = Direction::Minimize;
};

inline AllocationPlan allocate(const AllocationRequest& req) {
  const auto M = static_cast<std::int64_t>(req.probs ? req.probs->size() : req.cells);
  auto need_probs = [&]() -> const ProbabilityVector& {
    if (!req.probs)
      throw Error(ErrorKind::InvalidArgument, std::string(to_token(req.strategy)) + " needs probabilities");
    return *req.probs;
  };
  auto need_bounds = [&]() -> const ChannelBounds& {
    if (!req.bounds)
      throw Error(ErrorKind::MissingBounds, std::string(to_token(req.strategy)) + " needs l_min and l_max");
    return *req.bounds;
  };
  switch (req.strategy) {
    case Strategy::ApCase1: return allocate_ap_case1(M, req.channels, need_probs(), req.direction);
    case Strategy::ApCase2: return allocate_ap_case2(M, req.channels, need_bounds(), need_probs(), req.direction);
    case Strategy::ApCase3: {
      const std::int64_t target = req.l_min.value_or(req.bounds ? req.bounds->l_min : 1);
      return allocate_ap_case3(M, req.channels, target, need_probs(), req.direction);
    }
    case Strategy::GpCase4: return allocate_gp_case4(M, req.channels, need_bounds(), need_probs(), req.direction);
    case Strategy::SourceCoding: return allocate_source_coding(need_probs(), req.channels, req.direction);
    case Strategy::UniformFca: return allocate_uniform(M, req.channels);
  }
  throw Error(ErrorKind::UnknownStrategy, "unhandled strategy");
}

}  // namespace ohca
