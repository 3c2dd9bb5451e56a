#include "fastmks/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fastmks/errors.hpp"

namespace fastmks {

double expansion_constant(const Dataset& data, const Kernel& kernel,
                          EvalCounter& counter, std::size_t cap) {
  const std::size_t n = data.size();
  if (n > cap)
    throw InvalidArgument("expansion_constant is O(n^2); dataset has " +
                          std::to_string(n) + " points, cap is " + std::to_string(cap));
  if (!data.prepared()) throw InvalidArgument("dataset must be prepared for this kernel");

  std::vector<std::vector<double>> dm(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      dm[i][j] = dm[j][i] = induced_distance(kernel, data, i, j, counter);

  double c = 2.0;
  std::vector<double> sorted(n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < n; ++j) sorted[j] = dm[p][j];
    std::sort(sorted.begin(), sorted.end());
    auto ball = [&](double radius) {
      return static_cast<double>(
          std::upper_bound(sorted.begin(), sorted.end(), radius) - sorted.begin());
    };
    for (const double d : sorted) {
      if (d <= 0.0) continue;
      // Candidate radii d/2 and d: the only places either ball count steps.
      for (const double delta : {d * 0.5, d}) {
        const double inner = ball(delta);
        if (inner > 0.0) c = std::max(c, ball(2.0 * delta) / inner);
      }
    }
  }
  return c;
}

ConcentrationEstimate directional_concentration(const Dataset& data, const Kernel& kernel,
                                                std::size_t direction_samples,
                                                std::size_t interval_samples,
                                                std::uint64_t seed, EvalCounter& counter) {
  const std::size_t n = data.size();
  if (!data.prepared()) throw InvalidArgument("dataset must be prepared for this kernel");
  ConcentrationEstimate est;
  if (n == 0) return est;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  for (std::size_t ds = 0; ds < direction_samples; ++ds) {
    const std::size_t dir = pick(rng);
    const double self = data.self_kernel(dir);
    if (!(self > 0.0)) continue;  // zero-norm point spans no direction
    const double inv_norm = 1.0 / std::sqrt(self);
    ++est.directions;

    // Projection of every point onto the unit direction through dir, computed
    // purely from kernel values.
    std::vector<double> proj(n);
    for (std::size_t i = 0; i < n; ++i)
      proj[i] = kernel.eval(data.point(dir), data.point(i), counter) * inv_norm;

    for (std::size_t is = 0; is < interval_samples; ++is) {
      const std::size_t center = pick(rng);
      // Slab half-width: half the distance to another sampled point, so the
      // widths track the dataset's own scale distribution.
      const std::size_t other = pick(rng);
      const double delta =
          0.5 * induced_distance(kernel, data, center, other, counter);
      if (!(delta > 0.0)) continue;
      ++est.slabs;

      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(proj[i] - proj[center]) <= delta) members.push_back(i);

      // Greedy cover: each pick discards everything within 2*delta, so the
      // count never exceeds the true number of delta-balls needed.
      std::size_t balls = 0;
      std::vector<bool> covered(members.size(), false);
      for (std::size_t a = 0; a < members.size(); ++a) {
        if (covered[a]) continue;
        ++balls;
        covered[a] = true;
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          if (covered[b]) continue;
          if (induced_distance(kernel, data, members[a], members[b], counter) <=
              2.0 * delta)
            covered[b] = true;
        }
      }
      est.gamma = std::max(est.gamma, balls);
    }
  }
  return est;
}

SpeedupReport speedup_report(const std::map<std::size_t, std::vector<std::uint64_t>>& evals_by_k,
                             std::size_t n, std::uint64_t construction_evals) {
  SpeedupReport rep;
  rep.n = n;
  rep.construction_evals = construction_evals;
  std::size_t total_queries = 0;
  for (const auto& [k, evals] : evals_by_k) {
    SpeedupRow row;
    row.k = k;
    row.queries = evals.size();
    for (const std::uint64_t e : evals) row.total_evals += e;
    if (row.queries > 0) {
      row.mean_evals = static_cast<double>(row.total_evals) /
                       static_cast<double>(row.queries);
      if (row.total_evals > 0)
        row.speedup = static_cast<double>(row.queries) * static_cast<double>(n) /
                      static_cast<double>(row.total_evals);
    }
    rep.total_evals += row.total_evals;
    total_queries += row.queries;
    rep.rows.push_back(row);
  }
  if (rep.total_evals > 0)
    rep.overall_speedup = static_cast<double>(total_queries) * static_cast<double>(n) /
                          static_cast<double>(rep.total_evals);
  if (total_queries > 0) {
    const double mean = static_cast<double>(rep.total_evals) /
                        static_cast<double>(total_queries);
    const double saved = static_cast<double>(n) - mean;
    if (saved > 0.0)
      rep.construction_breakeven_queries =
          static_cast<double>(construction_evals) / saved;
  }
  return rep;
}

}  // namespace fastmks
