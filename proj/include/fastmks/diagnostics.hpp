#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fastmks/kernels.hpp"
#include "fastmks/search.hpp"

namespace fastmks {

// Smallest c >= 2 with |B(p, 2*delta)| <= c * |B(p, delta)| for every dataset
// point p and every delta > 0, in the kernel-induced metric. Both ball counts
// are step functions of delta, stepping at observed distances (denominator)
// and their halves (numerator), so scanning those candidates attains the
// supremum. Exact but O(n^2); datasets larger than cap raise InvalidArgument.
double expansion_constant(const Dataset& data, const Kernel& kernel,
                          EvalCounter& counter, std::size_t cap = 5000);

struct ConcentrationEstimate {
  std::size_t gamma = 1;        // max balls any sampled slab needed
  std::size_t directions = 0;   // directions actually sampled
  std::size_t slabs = 0;        // (center, width) pairs actually examined
};

// Sampled lower estimate of the directional concentration: how many
// distance-delta balls are needed to cover the points whose projections onto
// a sampled dataset direction fall within delta of a sampled center point.
// Projections use only kernel values (K(x,r)/sqrt(K(x,x))); the cover is
// greedy (repeatedly take an uncovered member, discard everything within
// 2*delta of it). An estimate, not the exact gamma.
ConcentrationEstimate directional_concentration(const Dataset& data, const Kernel& kernel,
                                                std::size_t direction_samples,
                                                std::size_t interval_samples,
                                                std::uint64_t seed, EvalCounter& counter);

struct SpeedupRow {
  std::size_t k = 0;
  std::size_t queries = 0;
  std::uint64_t total_evals = 0;
  double mean_evals = 0.0;
  double speedup = 0.0;  // (queries * n) / total_evals
};

struct SpeedupReport {
  std::size_t n = 0;
  std::vector<SpeedupRow> rows;            // one per k, ascending
  std::uint64_t total_evals = 0;           // across every batch
  double overall_speedup = 0.0;            // (sum queries * n) / total_evals
  std::uint64_t construction_evals = 0;
  // Queries needed before construction cost is repaid by per-query savings;
  // 0 when the tree saves nothing.
  double construction_breakeven_queries = 0.0;
};

// Aggregates per-query evaluation counts (keyed by k) against the linear-scan
// baseline of n evaluations per query.
SpeedupReport speedup_report(const std::map<std::size_t, std::vector<std::uint64_t>>& evals_by_k,
                             std::size_t n, std::uint64_t construction_evals);

}  // namespace fastmks
