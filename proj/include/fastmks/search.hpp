#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastmks/cover_tree.hpp"
#include "fastmks/kernels.hpp"

namespace fastmks {

enum class SearchMode {
  Exact,
  AbsoluteValue,  // returned value >= exact - epsilon
  RelativeValue,  // returned value >= (1 - epsilon) * exact when exact > 0
  Rank,           // returned point ranks in the top tau with probability >= 1 - delta
};

struct SearchConfig {
  std::size_t k = 1;
  SearchMode mode = SearchMode::Exact;
  double epsilon = 0.0;  // AbsoluteValue / RelativeValue
  double tau = 0.0;      // Rank: tolerated rank, 1 <= tau < n
  double delta = 0.0;    // Rank: failure probability, 0 < delta < 1
  // Skip evaluating K(q, child) when the parent's value plus the reachability
  // radii already cannot beat the current k-th best. On by default; exactness
  // is unaffected either way.
  bool parent_prune = true;

  // Mode strings: "exact", "ava:eps=0.01" (or "ava:0.01"), "rva:eps=0.1",
  // "ra:tau=100,delta=0.05". parse(mode_spec()) round-trips.
  static SearchConfig parse(const std::string& spec);
  std::string mode_spec() const;
};

struct Hit {
  std::size_t index = 0;
  double value = 0.0;
};

struct QueryResult {
  std::vector<Hit> hits;  // value descending, ties by ascending index
  std::uint64_t kernel_evals = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t nodes_pruned = 0;
  // RelativeValue only: the best value was <= 0, so the multiplicative
  // guarantee says nothing about this query.
  bool guarantee_void = false;
};

// Upper bound on K(q, x) over every x within radius of p in the induced
// metric: K(q,p) + radius * sqrt(K(q,q)).
double bound_general(double kernel_qp, double self_kernel_q, double radius);

// Tighter bound for normalized kernels (all points on the unit sphere).
// scale_radius_sq plays the role of (radius/2)^2; values > 1 mean the whole
// sphere is reachable and the bound is 1. Never exceeds bound_general for the
// same radius beyond fp noise.
double bound_normalized(double kernel_qp, double scale_radius_sq);

// Exhaustive top-k by kernel value; exactly data.size() counter ticks. This
// is the correctness oracle and the baseline for speedups.
QueryResult linear_scan(const Dataset& data, const Kernel& kernel, const PointRef& query,
                        std::size_t k, EvalCounter& counter);

// Branch-and-bound top-k max-kernel search over the cover tree. Exact in
// SearchMode::Exact; the other modes trade accuracy for fewer evaluations
// under the guarantees described on SearchMode.
QueryResult fastmks(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                    const PointRef& query, const SearchConfig& config,
                    EvalCounter& counter);

QueryResult fastmks_exact(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                          const PointRef& query, std::size_t k, EvalCounter& counter);
QueryResult fastmks_ava(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                        const PointRef& query, std::size_t k, double epsilon,
                        EvalCounter& counter);
QueryResult fastmks_rva(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                        const PointRef& query, std::size_t k, double epsilon,
                        EvalCounter& counter);
QueryResult fastmks_ra(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                       const PointRef& query, std::size_t k, double tau, double delta,
                       EvalCounter& counter);

// Number of stratified samples needed so that a uniform draw of that many
// points contains a top-tau point with probability at least 1 - delta:
// ceil(log(delta) / log(1 - tau/n)).
std::uint64_t rank_sample_count(std::size_t n, double tau, double delta);

}  // namespace fastmks
