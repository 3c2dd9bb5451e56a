#include "fastmks/search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "fastmks/errors.hpp"

namespace fastmks {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Top-k list ordered by (value desc, index asc); duplicates in feature space
// carry distinct indices and occupy separate slots.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(std::size_t index, double value) {
    if (hits_.size() == k_ && !better(value, index, hits_.back())) return;
    Hit h{index, value};
    auto pos = std::upper_bound(hits_.begin(), hits_.end(), h,
                                [](const Hit& a, const Hit& b) {
                                  return a.value > b.value ||
                                         (a.value == b.value && a.index < b.index);
                                });
    hits_.insert(pos, h);
    if (hits_.size() > k_) hits_.pop_back();
  }

  // k-th best value, the prune threshold; -inf until k candidates exist.
  double beta() const { return hits_.size() == k_ ? hits_.back().value : kNegInf; }

  std::vector<Hit> take() { return std::move(hits_); }

 private:
  static bool better(double value, std::size_t index, const Hit& worst) {
    return value > worst.value || (value == worst.value && index < worst.index);
  }
  std::size_t k_;
  std::vector<Hit> hits_;
};

struct QueueEntry {
  double bound;             // exact node bound when kernel_known, else parent-derived
  std::uint32_t node;
  double kernel_qp;         // K(q, node point); valid iff kernel_known
  bool kernel_known;
};

struct QueueOrder {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // max-heap on bound
    return a.node > b.node;                            // deterministic tie-break
  }
};

double clamp_unit(double v) { return std::min(1.0, std::max(-1.0, v)); }

void check_config(const SearchConfig& config, std::size_t n) {
  if (config.k < 1) throw InvalidArgument("k must be >= 1");
  if (config.k > n)
    throw InvalidArgument("k = " + std::to_string(config.k) + " exceeds dataset size " +
                          std::to_string(n));
  switch (config.mode) {
    case SearchMode::Exact:
      break;
    case SearchMode::AbsoluteValue:
    case SearchMode::RelativeValue:
      if (!(config.epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
      break;
    case SearchMode::Rank:
      if (!(config.tau >= 1.0)) throw InvalidArgument("tau must be >= 1");
      if (config.tau >= static_cast<double>(n))
        throw InvalidArgument("tau = " + std::to_string(config.tau) +
                              " must be below the dataset size " + std::to_string(n));
      if (!(config.delta > 0.0 && config.delta < 1.0))
        throw InvalidArgument("delta must lie in (0, 1)");
      break;
  }
}

}  // namespace

double bound_general(double kernel_qp, double self_kernel_q, double radius) {
  return kernel_qp + radius * std::sqrt(std::max(0.0, self_kernel_q));
}

double bound_normalized(double kernel_qp, double scale_radius_sq) {
  if (scale_radius_sq > 1.0) return 1.0;  // the cap covers the whole sphere
  const double k = clamp_unit(kernel_qp);
  if (k > 1.0 - 2.0 * scale_radius_sq) return 1.0;
  return k * (1.0 - 2.0 * scale_radius_sq) +
         2.0 * std::sqrt(scale_radius_sq) *
             std::sqrt((1.0 - k * k) * (1.0 - scale_radius_sq));
}

std::uint64_t rank_sample_count(std::size_t n, double tau, double delta) {
  // P(miss all top-tau in one draw) = 1 - tau/n; want (1-tau/n)^s <= delta.
  const double s = std::log(delta) / std::log(1.0 - tau / static_cast<double>(n));
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(s)));
}

QueryResult linear_scan(const Dataset& data, const Kernel& kernel, const PointRef& query,
                        std::size_t k, EvalCounter& counter) {
  SearchConfig cfg;
  cfg.k = k;
  check_config(cfg, data.size());
  const std::uint64_t start = counter.count;
  TopK top(k);
  for (std::size_t i = 0; i < data.size(); ++i)
    top.offer(i, kernel.eval(query, data.point(i), counter));
  QueryResult r;
  r.hits = top.take();
  r.kernel_evals = counter.count - start;
  return r;
}

QueryResult fastmks(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                    const PointRef& query, const SearchConfig& config,
                    EvalCounter& counter) {
  const std::size_t n = data.size();
  check_config(config, n);
  if (!data.prepared()) throw InvalidArgument("dataset must be prepared for this kernel");
  if (tree.dataset_fingerprint() != data.fingerprint())
    throw InvalidArgument("tree was built from a different dataset");
  if (tree.kernel_spec() != kernel.spec())
    throw InvalidArgument("tree was built with kernel '" + tree.kernel_spec() + "'");

  const std::uint64_t start = counter.count;
  QueryResult result;
  TopK top(config.k);

  const double self_q = kernel.eval(query, query, counter);
  const double sqrt_q = std::sqrt(std::max(0.0, self_q));
  const bool normalized = kernel.normalized();

  // Exact upper bound on K(q, x) over the node's subtree, given K(q, point).
  auto node_bound = [&](const CoverNode& node, double kernel_qp) {
    const double fd = node.furthest_descendant;
    if (normalized) {
      const double half = fd * 0.5;
      return bound_normalized(kernel_qp, half * half);
    }
    return bound_general(kernel_qp, self_q, fd);
  };

  // Approximation prunes. Every rule pairs the radius test from the stopping
  // criterion with a slot-aware bound test so the guarantee holds for each of
  // the k result slots, not just the maximum; at k = 1 the extra test is
  // implied and the behavior matches the plain rule.
  auto approx_prune = [&](double bound, double fd, double beta) {
    switch (config.mode) {
      case SearchMode::AbsoluteValue:
        return fd * sqrt_q <= config.epsilon && bound <= beta + config.epsilon;
      case SearchMode::RelativeValue:
        return beta > 0.0 && fd * sqrt_q <= config.epsilon * beta &&
               bound <= beta * (1.0 + config.epsilon);
      default:
        return false;
    }
  };

  const double ra_threshold =
      config.mode == SearchMode::Rank
          ? static_cast<double>(n) /
                static_cast<double>(rank_sample_count(n, config.tau, config.delta))
          : 0.0;

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueOrder> queue;

  const CoverNode& root = tree.root();
  const double root_k = kernel.eval(query, data.point(root.point), counter);
  top.offer(root.point, root_k);
  queue.push({node_bound(root, root_k), tree.root_id(), root_k, true});

  while (!queue.empty()) {
    QueueEntry e = queue.top();
    queue.pop();
    const CoverNode& node = tree.node(e.node);
    const double beta = top.beta();

    // The stored bound is exact for kernel_known entries and an upper
    // estimate otherwise, so pruning on it is always sound. When the parent
    // prune is disabled, estimate-based entries get their kernel evaluated
    // before any prune decision.
    if (e.kernel_known || config.parent_prune) {
      if (e.bound < beta || approx_prune(e.bound, node.furthest_descendant, beta)) {
        ++result.nodes_pruned;
        continue;
      }
    }

    double own_bound = e.bound;
    if (!e.kernel_known) {
      e.kernel_qp = kernel.eval(query, data.point(node.point), counter);
      top.offer(node.point, e.kernel_qp);
      own_bound = node_bound(node, e.kernel_qp);
      if (!config.parent_prune) {
        const double b2 = top.beta();
        if (own_bound < b2 || approx_prune(own_bound, node.furthest_descendant, b2)) {
          ++result.nodes_pruned;
          continue;
        }
      }
    }
    ++result.nodes_visited;

    for (const std::size_t dup : node.duplicates)
      top.offer(dup, kernel.eval(query, data.point(dup), counter));

    if (node.children.empty()) continue;

    const double beta2 = top.beta();
    if (own_bound < beta2) continue;  // subtree can no longer matter
    if (approx_prune(own_bound, node.furthest_descendant, beta2)) continue;
    if (config.mode == SearchMode::Rank &&
        static_cast<double>(node.subtree_size) <= ra_threshold)
      continue;  // small stratum: its point already stands in for the subtree

    for (const std::uint32_t child_id : node.children) {
      const CoverNode& child = tree.node(child_id);
      if (child.point == node.point) {
        queue.push({node_bound(child, e.kernel_qp), child_id, e.kernel_qp, true});
        continue;
      }
      // |K(q,c) - K(q,p)| <= d(p,c) * sqrt(K(q,q)) bounds the child's value
      // without evaluating it.
      const double est_kernel = e.kernel_qp + child.parent_distance * sqrt_q;
      const double est_bound = bound_general(est_kernel, self_q, child.furthest_descendant);
      if (config.parent_prune && est_bound < beta2) {
        ++result.nodes_pruned;
        continue;
      }
      queue.push({est_bound, child_id, 0.0, false});
    }
  }

  result.hits = top.take();
  result.kernel_evals = counter.count - start;
  if (config.mode == SearchMode::RelativeValue &&
      (result.hits.empty() || result.hits.front().value <= 0.0))
    result.guarantee_void = true;
  return result;
}

QueryResult fastmks_exact(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                          const PointRef& query, std::size_t k, EvalCounter& counter) {
  SearchConfig cfg;
  cfg.k = k;
  return fastmks(tree, data, kernel, query, cfg, counter);
}

QueryResult fastmks_ava(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                        const PointRef& query, std::size_t k, double epsilon,
                        EvalCounter& counter) {
  SearchConfig cfg;
  cfg.k = k;
  cfg.mode = SearchMode::AbsoluteValue;
  cfg.epsilon = epsilon;
  return fastmks(tree, data, kernel, query, cfg, counter);
}

QueryResult fastmks_rva(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                        const PointRef& query, std::size_t k, double epsilon,
                        EvalCounter& counter) {
  SearchConfig cfg;
  cfg.k = k;
  cfg.mode = SearchMode::RelativeValue;
  cfg.epsilon = epsilon;
  return fastmks(tree, data, kernel, query, cfg, counter);
}

QueryResult fastmks_ra(const CoverTree& tree, const Dataset& data, const Kernel& kernel,
                       const PointRef& query, std::size_t k, double tau, double delta,
                       EvalCounter& counter) {
  SearchConfig cfg;
  cfg.k = k;
  cfg.mode = SearchMode::Rank;
  cfg.tau = tau;
  cfg.delta = delta;
  return fastmks(tree, data, kernel, query, cfg, counter);
}

SearchConfig SearchConfig::parse(const std::string& spec) {
  SearchConfig cfg;
  std::string name = spec;
  std::string args;
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    name = spec.substr(0, colon);
    args = spec.substr(colon + 1);
  }
  auto parse_num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("mode spec '" + spec + "': bad number '" + s + "'");
    }
  };
  std::map<std::string, double> kv;
  bool bare = false;
  double bare_value = 0.0;
  if (!args.empty()) {
    std::stringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        bare = true;
        bare_value = parse_num(item);
      } else {
        kv[item.substr(0, eq)] = parse_num(item.substr(eq + 1));
      }
    }
  }
  auto take = [&](const char* key, bool required, double fallback) {
    if (auto it = kv.find(key); it != kv.end()) {
      const double v = it->second;
      kv.erase(it);
      return v;
    }
    if (bare) {
      bare = false;
      return bare_value;
    }
    if (required) throw InvalidArgument("mode spec '" + spec + "': missing " + key);
    return fallback;
  };
  if (name == "exact") {
    cfg.mode = SearchMode::Exact;
  } else if (name == "ava") {
    cfg.mode = SearchMode::AbsoluteValue;
    cfg.epsilon = take("eps", true, 0.0);
  } else if (name == "rva") {
    cfg.mode = SearchMode::RelativeValue;
    cfg.epsilon = take("eps", true, 0.0);
  } else if (name == "ra") {
    cfg.mode = SearchMode::Rank;
    cfg.tau = take("tau", true, 0.0);
    cfg.delta = take("delta", true, 0.0);
  } else {
    throw InvalidArgument("unknown mode '" + name + "'; valid: exact, ava, rva, ra");
  }
  if (!kv.empty())
    throw InvalidArgument("mode spec '" + spec + "': unknown parameter '" +
                          kv.begin()->first + "'");
  if (bare) throw InvalidArgument("mode spec '" + spec + "': unexpected bare value");
  return cfg;
}

std::string SearchConfig::mode_spec() const {
  auto fmt = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
  };
  switch (mode) {
    case SearchMode::Exact:
      return "exact";
    case SearchMode::AbsoluteValue:
      return "ava:eps=" + fmt(epsilon);
    case SearchMode::RelativeValue:
      return "rva:eps=" + fmt(epsilon);
    case SearchMode::Rank:
      return "ra:tau=" + fmt(tau) + ",delta=" + fmt(delta);
  }
  return "exact";
}

}  // namespace fastmks
