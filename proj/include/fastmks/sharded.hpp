#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fastmks/cover_tree.hpp"
#include "fastmks/search.hpp"

namespace fastmks {

// m independent cover trees over a partition of the dataset, a stand-in for
// distributing the index across workers: each shard answers from its own tree
// and a master merges the per-shard top-k lists.
class ShardedIndex {
 public:
  // Round-robin partition by index; with permute_seed the indices are
  // shuffled deterministically first. Shard members keep ascending global
  // order so shard-local ties break exactly like a single tree. Empty shards
  // (m > n) are allowed.
  static ShardedIndex build(const Dataset& data, const Kernel& kernel, double base,
                            std::size_t m, std::optional<std::uint64_t> permute_seed,
                            EvalCounter& counter);

  std::size_t shard_count() const { return shards_.size(); }  // non-empty shards
  std::size_t requested_shards() const { return requested_m_; }
  std::size_t total_points() const { return total_points_; }
  std::size_t shard_slot(std::size_t s) const { return shards_[s].slot; }
  const Dataset& shard_data(std::size_t s) const { return shards_[s].data; }
  const CoverTree& shard_tree(std::size_t s) const { return shards_[s].tree; }
  const std::vector<std::size_t>& shard_globals(std::size_t s) const {
    return shards_[s].globals;
  }
  std::uint64_t construction_evals() const { return construction_evals_; }

 private:
  struct Shard {
    Dataset data;                      // shard-local copy of the points
    CoverTree tree;
    std::vector<std::size_t> globals;  // local index -> dataset index, ascending
    std::size_t slot = 0;              // round-robin slot this shard fills
  };
  std::vector<Shard> shards_;
  std::size_t total_points_ = 0;
  std::size_t requested_m_ = 1;
  std::uint64_t construction_evals_ = 0;
};

struct ShardedQueryResult {
  std::vector<Hit> hits;  // global indices, same order contract as fastmks
  std::vector<std::uint64_t> per_shard_evals;
  std::uint64_t total_evals = 0;      // sum over shards
  std::uint64_t max_shard_evals = 0;  // the critical path
  std::size_t merge_items = 0;        // candidate rows the master merged
  // Evaluations on the critical path plus one unit per merged row.
  std::uint64_t parallel_cost = 0;
  bool guarantee_void = false;
};

// Runs the configured search on every shard and merges by (value desc, global
// index asc). Exact mode returns exactly the single-tree hits.
ShardedQueryResult sharded_search(const ShardedIndex& index, const Kernel& kernel,
                                  const PointRef& query, const SearchConfig& config);

}  // namespace fastmks
