#include "fastmks/cover_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "fastmks/errors.hpp"

namespace fastmks {

void split_by_radius(const std::unordered_map<std::size_t, double>& pivot_distance,
                     double radius,
                     std::vector<std::vector<std::size_t>*> point_sets,
                     std::vector<std::size_t>& near,
                     std::vector<std::size_t>& far) {
  for (auto* set : point_sets) {
    std::vector<std::size_t> keep;
    keep.reserve(set->size());
    for (const std::size_t idx : *set) {
      const double d = pivot_distance.at(idx);
      if (d <= radius) {
        near.push_back(idx);
      } else if (d < 2.0 * radius) {
        far.push_back(idx);
      } else {
        keep.push_back(idx);
      }
    }
    set->swap(keep);
  }
}

namespace {

struct Builder {
  const Dataset& data;
  const Kernel& kernel;
  double base;
  EvalCounter& counter;
  std::vector<CoverNode>& nodes;

  double scale_radius(std::int32_t scale) const { return std::pow(base, scale); }

  // Distances from pivot to every listed point; indices at distance zero go
  // to dups instead of the output sets.
  std::unordered_map<std::size_t, double> distances(
      std::size_t pivot, std::vector<std::size_t>& points,
      std::vector<std::size_t>& dups) const {
    std::unordered_map<std::size_t, double> dist;
    dist.reserve(points.size());
    std::vector<std::size_t> keep;
    keep.reserve(points.size());
    for (const std::size_t idx : points) {
      const double d = induced_distance(kernel, data, pivot, idx, counter);
      if (d == 0.0) {
        dups.push_back(idx);
      } else {
        dist.emplace(idx, d);
        keep.push_back(idx);
      }
    }
    points.swap(keep);
    return dist;
  }

  std::uint32_t make_leaf(std::size_t point) {
    CoverNode n;
    n.point = point;
    nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }

  // Builds the subtree for point p at scale, consuming near (all within
  // base^scale of p) and far (between base^scale and base^(scale+1)).
  // dist holds d_K(p, x) for every member of both sets and is extended as
  // points flow back from children. Unconsumed far points are returned in
  // unused; their dist entries stay valid for the caller's re-split.
  std::uint32_t construct(std::size_t p, std::int32_t scale,
                          std::vector<std::size_t> near, std::vector<std::size_t> far,
                          std::unordered_map<std::size_t, double> dist,
                          std::vector<std::size_t>& unused) {
    if (near.empty()) {
      unused = std::move(far);
      return make_leaf(p);
    }

    const double child_radius = scale_radius(scale - 1);

    // Self subtree first: p re-appears one level down and absorbs everything
    // within base^(scale-1); its leftovers are exactly the points p must
    // cover with other children at this level.
    std::vector<std::size_t> self_near, self_far;
    split_by_radius(dist, child_radius, {&near}, self_near, self_far);
    std::unordered_map<std::size_t, double> self_dist;
    for (const std::size_t idx : self_near) self_dist.emplace(idx, dist.at(idx));
    for (const std::size_t idx : self_far) self_dist.emplace(idx, dist.at(idx));
    std::vector<std::size_t> self_unused;
    const std::uint32_t self_id =
        construct(p, scale - 1, std::move(self_near), std::move(self_far),
                  std::move(self_dist), self_unused);
    // Points at 2*base^(scale-1) or more from p skip the self frame entirely
    // (possible when base >= 2) but still belong to this level's pick pool.
    std::vector<std::size_t> residue = std::move(near);
    near = std::move(self_unused);
    near.insert(near.end(), residue.begin(), residue.end());

    std::vector<std::uint32_t> children{self_id};
    while (!near.empty()) {
      const auto qit = std::min_element(near.begin(), near.end());
      const std::size_t q = *qit;
      near.erase(qit);

      // One distance per remaining candidate; zero-distance points become
      // duplicates of q and leave the candidate sets entirely.
      std::vector<std::size_t> q_dups;
      std::vector<std::size_t> members;
      members.reserve(near.size() + far.size());
      members.insert(members.end(), near.begin(), near.end());
      members.insert(members.end(), far.begin(), far.end());
      auto q_dist = distances(q, members, q_dups);
      if (!q_dups.empty()) {
        std::unordered_set<std::size_t> gone(q_dups.begin(), q_dups.end());
        auto drop = [&](std::vector<std::size_t>& v) {
          v.erase(std::remove_if(v.begin(), v.end(),
                                 [&](std::size_t i) { return gone.count(i) > 0; }),
                  v.end());
        };
        drop(near);
        drop(far);
      }

      std::vector<std::size_t> q_near, q_far;
      split_by_radius(q_dist, child_radius, {&near, &far}, q_near, q_far);
      std::unordered_map<std::size_t, double> q_sub;
      for (const std::size_t idx : q_near) q_sub.emplace(idx, q_dist.at(idx));
      for (const std::size_t idx : q_far) q_sub.emplace(idx, q_dist.at(idx));
      std::vector<std::size_t> q_unused;
      std::uint32_t child_id = construct(q, scale - 1, std::move(q_near),
                                         std::move(q_far), std::move(q_sub), q_unused);
      nodes[child_id].parent_distance = dist.at(q);
      if (!q_dups.empty()) attach_duplicates(child_id, q_dups);
      children.push_back(child_id);

      // Leftovers from q rejoin p's sets according to their distance to p,
      // which is already in dist.
      std::vector<std::size_t> back_near, back_far;
      split_by_radius(dist, scale_radius(scale), {&q_unused}, back_near, back_far);
      near.insert(near.end(), back_near.begin(), back_near.end());
      far.insert(far.end(), back_far.begin(), back_far.end());
    }

    unused = std::move(far);

    if (children.size() == 1) {
      // Only the self line continued: nothing branches at this scale, so the
      // explicit tree keeps the coalesced descendant node.
      return self_id;
    }

    CoverNode n;
    n.point = p;
    n.scale = scale;
    n.children = std::move(children);
    // Everything that entered this frame and did not leave as unused was
    // absorbed somewhere below p, and dist holds its exact distance to p, so
    // the furthest-descendant cache costs no extra kernel evaluations.
    std::unordered_set<std::size_t> leftover(unused.begin(), unused.end());
    double fd = 0.0;
    for (const auto& [idx, d] : dist)
      if (leftover.count(idx) == 0) fd = std::max(fd, d);
    n.furthest_descendant = fd;
    n.subtree_size = 0;
    for (const std::uint32_t c : n.children) n.subtree_size += nodes[c].subtree_size;
    nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(nodes.size() - 1);
  }

  void attach_duplicates(std::uint32_t id, std::vector<std::size_t>& dups) {
    std::sort(dups.begin(), dups.end());
    auto& n = nodes[id];
    n.duplicates.insert(n.duplicates.end(), dups.begin(), dups.end());
    n.subtree_size += dups.size();
  }
};

void collect_points(const std::vector<CoverNode>& nodes, std::uint32_t id,
                    std::vector<std::size_t>& out) {
  const auto& n = nodes[id];
  if (n.children.empty()) out.push_back(n.point);
  for (const std::size_t d : n.duplicates) out.push_back(d);
  for (const std::uint32_t c : n.children) collect_points(nodes, c, out);
}

}  // namespace

CoverTree CoverTree::build(const Dataset& data, const Kernel& kernel, double base,
                           EvalCounter& counter) {
  if (!(base > 1.0)) throw InvalidArgument("cover tree base must be > 1");
  if (!data.prepared()) throw InvalidArgument("dataset must be prepared before building");
  const std::size_t n = data.size();

  CoverTree tree;
  tree.base_ = base;
  tree.point_count_ = n;
  tree.fingerprint_ = data.fingerprint();
  tree.kernel_spec_ = kernel.spec();

  const std::uint64_t start = counter.count;
  Builder b{data, kernel, base, counter, tree.nodes_};

  std::vector<std::size_t> others(n > 0 ? n - 1 : 0);
  for (std::size_t i = 1; i < n; ++i) others[i - 1] = i;
  std::vector<std::size_t> root_dups;
  auto dist = b.distances(0, others, root_dups);

  if (others.empty()) {
    tree.root_id_ = b.make_leaf(0);
    if (!root_dups.empty()) b.attach_duplicates(tree.root_id_, root_dups);
  } else {
    double maxd = 0.0;
    for (const auto& [idx, d] : dist) maxd = std::max(maxd, d);
    auto top = static_cast<std::int32_t>(std::ceil(std::log(maxd) / std::log(base)));
    while (std::pow(base, top) < maxd) ++top;  // guard the ceil against rounding
    tree.root_scale_ = top;

    std::vector<std::size_t> unused;
    tree.root_id_ = b.construct(0, top, std::move(others), {}, std::move(dist), unused);
    if (!unused.empty())
      throw Error("internal: construction left unattached points");
    if (!root_dups.empty()) b.attach_duplicates(tree.root_id_, root_dups);
  }

  tree.construction_evals_ = counter.count - start;
  if (tree.root().subtree_size != n)
    throw Error("internal: root subtree size " + std::to_string(tree.root().subtree_size) +
                " != dataset size " + std::to_string(n));
  return tree;
}

TreeStats CoverTree::stats() const {
  TreeStats s;
  s.nodes = nodes_.size();
  s.points = point_count_;
  s.root_scale = root_scale_;
  s.construction_evals = construction_evals_;
  std::int32_t min_scale = root_scale_;
  std::function<void(std::uint32_t, std::size_t)> walk = [&](std::uint32_t id,
                                                             std::size_t depth) {
    const auto& n = nodes_[id];
    s.depth = std::max(s.depth, depth);
    s.max_children = std::max(s.max_children, n.children.size());
    s.duplicate_points += n.duplicates.size();
    if (n.scale != kLeafScale) min_scale = std::min(min_scale, n.scale);
    for (const std::uint32_t c : n.children) walk(c, depth + 1);
  };
  walk(root_id_, 0);
  s.min_scale = min_scale;
  return s;
}

InvariantReport CoverTree::validate(const Dataset& data, const Kernel& kernel,
                                    EvalCounter& counter) const {
  InvariantReport rep;
  const std::size_t n = data.size();
  rep.node_budget = nodes_.size() <= 2 * n;

  // Every dataset index must be reported exactly once by a full walk.
  {
    std::vector<std::size_t> pts;
    collect_points(nodes_, root_id_, pts);
    std::vector<bool> seen(n, false);
    bool ok = pts.size() == n;
    for (const std::size_t p : pts) {
      if (p >= n || seen[p]) {
        ok = false;
        break;
      }
      seen[p] = true;
    }
    if (ok)
      for (std::size_t i = 0; i < n; ++i) ok = ok && seen[i];
    rep.nesting = ok;
  }

  // Distances are recomputed on demand; the full matrix would need O(n^2)
  // memory, which large suites cannot afford.
  auto dist = [&](std::size_t i, std::size_t j) {
    return induced_distance(kernel, data, i, j, counter);
  };

  std::function<void(std::uint32_t)> walk = [&](std::uint32_t id) {
    const auto& node = nodes_[id];
    if (!node.children.empty()) {
      if (nodes_[node.children[0]].point != node.point) rep.nesting = false;
      if (node.scale == kLeafScale) rep.nesting = false;
      for (std::size_t c = 0; c < node.children.size(); ++c) {
        const auto& child = nodes_[node.children[c]];
        if (c == 0) {
          if (child.point != node.point) rep.nesting = false;
        } else {
          const double d = dist(node.point, child.point);
          if (d > std::pow(base_, node.scale) * (1.0 + 1e-12)) rep.covering = false;
          if (child.parent_distance != d) rep.cache_parent = false;
        }
        walk(node.children[c]);
      }
      // Separation: the children of one node are introduced one scale below
      // it, pairwise more than base^(scale-1) apart (the node's own point
      // included). The batch construction promises no more than that; points
      // in different subtrees can sit arbitrarily close.
      const double sep = std::pow(base_, node.scale - 1);
      std::vector<std::size_t> pts{node.point};
      for (std::size_t c = 1; c < node.children.size(); ++c)
        pts.push_back(nodes_[node.children[c]].point);
      for (std::size_t a = 0; a < pts.size() && rep.separation; ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
          if (dist(pts[a], pts[b]) <= sep * (1.0 - 1e-12)) {
            rep.separation = false;
            break;
          }
    }
    // Exact cache checks against a brute-force recomputation.
    std::vector<std::size_t> pts;
    collect_points(nodes_, id, pts);
    if (pts.size() != node.subtree_size) rep.cache_subtree = false;
    double fd = 0.0;
    for (const std::size_t p : pts) fd = std::max(fd, dist(node.point, p));
    if (fd != node.furthest_descendant) rep.cache_furthest = false;
    // Geometric-sum budget for the configured base (collapses to base^(scale+1)
    // at base 2).
    if (node.scale != kLeafScale) {
      const double budget =
          std::pow(base_, node.scale + 1) / (base_ - 1.0) * (1.0 + 1e-12);
      if (fd > budget) rep.cache_furthest = false;
    }
  };
  walk(root_id_);
  return rep;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IndexFormatError("index file truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IndexFormatError("index file truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

constexpr char kMagic[8] = {'F', 'M', 'K', 'S', 'I', 'D', 'X', '1'};

}  // namespace

void CoverTree::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, 1);  // version
  put_f64(out, base_);
  put_i32(out, root_scale_);
  put_u64(out, fingerprint_);
  put_u64(out, construction_evals_);
  put_u64(out, point_count_);
  put_u32(out, static_cast<std::uint32_t>(kernel_spec_.size()));
  out.write(kernel_spec_.data(), static_cast<std::streamsize>(kernel_spec_.size()));
  put_u32(out, root_id_);
  put_u64(out, nodes_.size());
  for (const auto& n : nodes_) {
    put_u64(out, n.point);
    put_i32(out, n.scale);
    put_f64(out, n.parent_distance);
    put_f64(out, n.furthest_descendant);
    put_u64(out, n.subtree_size);
    put_u32(out, static_cast<std::uint32_t>(n.children.size()));
    for (const std::uint32_t c : n.children) put_u32(out, c);
    put_u32(out, static_cast<std::uint32_t>(n.duplicates.size()));
    for (const std::size_t d : n.duplicates) put_u64(out, d);
  }
  if (!out) throw IndexFormatError("failed to write index");
}

void CoverTree::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IndexFormatError("cannot open '" + path + "' for writing");
  save(out);
}

CoverTree CoverTree::load(std::istream& in, const Dataset& data, const Kernel& kernel) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IndexFormatError("not a cover tree index file");
  const std::uint32_t version = get_u32(in);
  if (version != 1)
    throw IndexFormatError("unsupported index version " + std::to_string(version));
  CoverTree t;
  t.base_ = get_f64(in);
  t.root_scale_ = get_i32(in);
  t.fingerprint_ = get_u64(in);
  t.construction_evals_ = get_u64(in);
  t.point_count_ = get_u64(in);
  const std::uint32_t spec_len = get_u32(in);
  t.kernel_spec_.resize(spec_len);
  in.read(t.kernel_spec_.data(), spec_len);
  if (!in) throw IndexFormatError("index file truncated");
  t.root_id_ = get_u32(in);
  const std::uint64_t count = get_u64(in);
  t.nodes_.resize(count);
  for (auto& n : t.nodes_) {
    n.point = get_u64(in);
    n.scale = get_i32(in);
    n.parent_distance = get_f64(in);
    n.furthest_descendant = get_f64(in);
    n.subtree_size = get_u64(in);
    n.children.resize(get_u32(in));
    for (auto& c : n.children) c = get_u32(in);
    n.duplicates.resize(get_u32(in));
    for (auto& d : n.duplicates) d = get_u64(in);
  }
  if (t.root_id_ >= count && count > 0)
    throw IndexFormatError("corrupt index: root id out of range");
  if (t.fingerprint_ != data.fingerprint())
    throw IndexFormatError("index was built from a different dataset (fingerprint mismatch)");
  if (t.kernel_spec_ != kernel.spec())
    throw IndexFormatError("index was built with kernel '" + t.kernel_spec_ +
                           "', not '" + kernel.spec() + "'");
  if (t.point_count_ != data.size())
    throw IndexFormatError("index point count does not match dataset");
  return t;
}

CoverTree CoverTree::load_file(const std::string& path, const Dataset& data,
                               const Kernel& kernel) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexFormatError("cannot open '" + path + "'");
  return load(in, data, kernel);
}

std::string CoverTree::stored_kernel_spec(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IndexFormatError("not a cover tree index file");
  const std::uint32_t version = get_u32(in);
  if (version != 1)
    throw IndexFormatError("unsupported index version " + std::to_string(version));
  get_f64(in);  // base
  get_i32(in);  // root scale
  get_u64(in);  // fingerprint
  get_u64(in);  // construction evals
  get_u64(in);  // point count
  const std::uint32_t spec_len = get_u32(in);
  std::string spec(spec_len, '\0');
  in.read(spec.data(), spec_len);
  if (!in) throw IndexFormatError("index file truncated");
  return spec;
}

std::string CoverTree::stored_kernel_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexFormatError("cannot open '" + path + "'");
  return stored_kernel_spec(in);
}

}  // namespace fastmks
