#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastmks/kernels.hpp"

namespace fastmks {

// Scale of a leaf (a point with no further structure below it); stands in for
// "minus infinity".
inline constexpr std::int32_t kLeafScale = std::numeric_limits<std::int32_t>::min();

struct CoverNode {
  std::size_t point = 0;              // dataset index
  std::int32_t scale = kLeafScale;    // level where this point branches; kLeafScale for leaves
  double parent_distance = 0.0;       // d_K to the parent node's point (0 at the root / self-children)
  double furthest_descendant = 0.0;   // exact max d_K(point, x) over subtree points
  std::size_t subtree_size = 1;       // dataset indices reachable here, duplicates included
  std::vector<std::uint32_t> children;   // node ids; children[0] shares this node's point
  std::vector<std::size_t> duplicates;   // indices at induced distance 0, reported after the point
};

struct TreeStats {
  std::size_t nodes = 0;
  std::size_t points = 0;
  std::int32_t root_scale = kLeafScale;
  std::int32_t min_scale = kLeafScale;  // lowest branching scale present
  std::size_t depth = 0;                // edges on the longest root-to-leaf path
  std::size_t max_children = 0;
  std::size_t duplicate_points = 0;
  std::uint64_t construction_evals = 0;
};

struct InvariantReport {
  bool nesting = true;      // children[0] repeats the node's point; every index appears exactly once
  bool covering = true;     // d_K(parent, child) <= base^(parent scale)
  bool separation = true;   // a node's point and its children: pairwise > base^(scale-1)
  bool cache_furthest = true;   // cached furthest_descendant equals the recomputed maximum
  bool cache_parent = true;     // cached parent_distance equals the recomputed distance
  bool cache_subtree = true;    // cached subtree_size equals the recomputed count
  bool node_budget = true;      // node count <= 2n
  bool ok() const {
    return nesting && covering && separation && cache_furthest && cache_parent &&
           cache_subtree && node_budget;
  }
};

// Cover tree over a dataset in the feature space of a kernel. Construction
// touches points only through induced_distance, so one structure serves dense
// vectors and strings alike. Immutable once built; concurrent readers are
// safe.
class CoverTree {
 public:
  static constexpr double kDefaultBase = 1.3;

  // data must be prepared for this kernel. base must be > 1.
  static CoverTree build(const Dataset& data, const Kernel& kernel, double base,
                         EvalCounter& counter);

  const CoverNode& node(std::uint32_t id) const { return nodes_[id]; }
  std::uint32_t root_id() const { return root_id_; }
  const CoverNode& root() const { return nodes_[root_id_]; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t point_count() const { return point_count_; }
  double base() const { return base_; }
  // Driver scale ceil(log_base(max distance from the root point)); the root
  // node's own scale can sit lower when the top levels never branch.
  std::int32_t root_scale() const { return root_scale_; }
  std::uint64_t construction_evals() const { return construction_evals_; }
  std::uint64_t dataset_fingerprint() const { return fingerprint_; }
  const std::string& kernel_spec() const { return kernel_spec_; }

  TreeStats stats() const;

  // Recomputes every structural property from scratch against the dataset.
  InvariantReport validate(const Dataset& data, const Kernel& kernel,
                           EvalCounter& counter) const;

  // Versioned binary format; load refuses datasets whose fingerprint or
  // kernel spec differ from what the index was built with.
  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  static CoverTree load(std::istream& in, const Dataset& data, const Kernel& kernel);
  static CoverTree load_file(const std::string& path, const Dataset& data,
                             const Kernel& kernel);
  // Kernel spec recorded in an index file, without loading the nodes.
  static std::string stored_kernel_spec(std::istream& in);
  static std::string stored_kernel_spec_file(const std::string& path);

 private:
  std::vector<CoverNode> nodes_;
  std::uint32_t root_id_ = 0;
  std::size_t point_count_ = 0;
  double base_ = kDefaultBase;
  std::int32_t root_scale_ = kLeafScale;
  std::uint64_t construction_evals_ = 0;
  std::uint64_t fingerprint_ = 0;
  std::string kernel_spec_;
};

// Partitions the listed points around a pivot: near = distance <= radius,
// far = radius < distance < 2*radius, both removed from the input sets;
// points at distance >= 2*radius stay. Distances are looked up by point
// index in pivot_distance.
void split_by_radius(const std::unordered_map<std::size_t, double>& pivot_distance,
                     double radius,
                     std::vector<std::vector<std::size_t>*> point_sets,
                     std::vector<std::size_t>& near,
                     std::vector<std::size_t>& far);

}  // namespace fastmks
