#include "fastmks/sharded.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "fastmks/errors.hpp"

namespace fastmks {

ShardedIndex ShardedIndex::build(const Dataset& data, const Kernel& kernel, double base,
                                 std::size_t m, std::optional<std::uint64_t> permute_seed,
                                 EvalCounter& counter) {
  if (m < 1) throw InvalidArgument("shard count must be >= 1");
  const std::size_t n = data.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (permute_seed) {
    std::mt19937_64 rng(*permute_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  ShardedIndex index;
  index.total_points_ = n;
  index.requested_m_ = m;
  const std::uint64_t start = counter.count;

  std::vector<std::vector<std::size_t>> assignment(m);
  for (std::size_t pos = 0; pos < n; ++pos) assignment[pos % m].push_back(order[pos]);

  index.shards_.reserve(m);
  for (std::size_t s = 0; s < m; ++s) {
    auto& globals = assignment[s];
    // Ascending global order inside the shard keeps tie-breaking identical to
    // the single-tree search after indices are mapped back.
    std::sort(globals.begin(), globals.end());
    if (globals.empty()) continue;

    Dataset local;
    if (data.string_domain()) {
      std::vector<std::string> seqs;
      seqs.reserve(globals.size());
      for (const std::size_t g : globals) seqs.push_back(data.sequence_at(g));
      local = Dataset::from_sequences(std::move(seqs));
    } else {
      std::vector<std::vector<double>> rows;
      rows.reserve(globals.size());
      for (const std::size_t g : globals) rows.push_back(data.vector_at(g));
      local = Dataset::from_vectors(std::move(rows));
    }
    local.prepare(kernel, counter);
    CoverTree tree = CoverTree::build(local, kernel, base, counter);
    index.shards_.push_back({std::move(local), std::move(tree), std::move(globals), s});
  }
  index.construction_evals_ = counter.count - start;
  return index;
}

ShardedQueryResult sharded_search(const ShardedIndex& index, const Kernel& kernel,
                                  const PointRef& query, const SearchConfig& config) {
  if (config.k > index.total_points())
    throw InvalidArgument("k = " + std::to_string(config.k) + " exceeds dataset size " +
                          std::to_string(index.total_points()));

  ShardedQueryResult out;
  out.per_shard_evals.assign(index.requested_shards(), 0);
  std::vector<Hit> merged;

  for (std::size_t s = 0; s < index.shard_count(); ++s) {
    const Dataset& local = index.shard_data(s);
    SearchConfig shard_cfg = config;
    shard_cfg.k = std::min(config.k, local.size());
    // Every mode degenerates to exact on a single point; rank mode's
    // tau < n precondition cannot even be met there.
    if (local.size() == 1) shard_cfg.mode = SearchMode::Exact;
    if (shard_cfg.mode == SearchMode::Rank && shard_cfg.tau >= static_cast<double>(local.size()))
      shard_cfg.tau = std::max(1.0, static_cast<double>(local.size()) - 1.0);

    EvalCounter shard_counter;
    QueryResult r = fastmks(index.shard_tree(s), local, kernel, query, shard_cfg,
                            shard_counter);
    out.per_shard_evals[index.shard_slot(s)] = shard_counter.count;
    out.total_evals += shard_counter.count;
    out.max_shard_evals = std::max(out.max_shard_evals, shard_counter.count);
    out.guarantee_void = out.guarantee_void || r.guarantee_void;

    const auto& globals = index.shard_globals(s);
    for (const Hit& h : r.hits) merged.push_back({globals[h.index], h.value});
  }

  out.merge_items = merged.size();
  std::sort(merged.begin(), merged.end(), [](const Hit& a, const Hit& b) {
    return a.value > b.value || (a.value == b.value && a.index < b.index);
  });
  if (merged.size() > config.k) merged.resize(config.k);
  out.hits = std::move(merged);
  out.parallel_cost = out.max_shard_evals + out.merge_items;
  return out;
}

}  // namespace fastmks
