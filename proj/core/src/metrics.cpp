#include "fedmap/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fedmap/rng.hpp"

namespace fedmap {

double wasserstein_1d(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw DataError("wasserstein_1d: empty input");
  std::vector<double> a(p.begin(), p.end());
  std::vector<double> b(q.begin(), q.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // integrate |Fa^-1(u) - Fb^-1(u)| over u in (0,1); both inverses are step
  // functions with breakpoints at i/n and j/m
  std::size_t ia = 0, ib = 0;
  double u = 0.0;
  double total = 0.0;
  while (ia < n && ib < m) {
    double next_a = static_cast<double>(ia + 1) / static_cast<double>(n);
    double next_b = static_cast<double>(ib + 1) / static_cast<double>(m);
    double u_next = std::min(next_a, next_b);
    total += (u_next - u) * std::fabs(a[ia] - b[ib]);
    if (next_a <= u_next) ++ia;
    if (next_b <= u_next) ++ib;
    u = u_next;
  }
  return total;
}

double emd_sliced(std::span<const Vec2> p, std::span<const Vec2> q,
                  int n_projections, std::uint64_t seed) {
  if (p.empty() || q.empty()) throw DataError("emd_sliced: empty input");
  if (n_projections < 1) throw ConfigError("emd_sliced: need >= 1 projection");
  Rng rng(derive_seed(seed, {0xe3dULL}));
  std::vector<double> proj_p(p.size());
  std::vector<double> proj_q(q.size());
  double acc = 0.0;
  for (int k = 0; k < n_projections; ++k) {
    double theta = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    double ce = std::cos(theta);
    double cn = std::sin(theta);
    for (std::size_t i = 0; i < p.size(); ++i) proj_p[i] = ce * p[i].e + cn * p[i].n;
    for (std::size_t i = 0; i < q.size(); ++i) proj_q[i] = ce * q[i].e + cn * q[i].n;
    acc += wasserstein_1d(proj_p, proj_q);
  }
  return acc / static_cast<double>(n_projections);
}

double divergence_rate(std::span<const AttackResult> results) {
  if (results.empty()) throw DataError("divergence_rate: no results");
  std::size_t diverged = 0;
  for (const auto& r : results) diverged += r.diverged() ? 1 : 0;
  return static_cast<double>(diverged) / static_cast<double>(results.size());
}

double centroid_distance(const AttackResult& result, const LocalBatch& batch) {
  return distance(result.x_dlg, batch.centroid());
}

double random_baseline_emd(std::span<const Vec2> p, const Boundary& boundary,
                           int n_realizations, int n_projections,
                           std::uint64_t seed) {
  if (!boundary.valid()) throw ConfigError("random_baseline_emd: invalid boundary");
  if (n_realizations < 1) throw ConfigError("random_baseline_emd: need >= 1 draw");
  double acc = 0.0;
  for (int r = 0; r < n_realizations; ++r) {
    Rng rng(derive_seed(seed, {0xba5eULL, static_cast<std::uint64_t>(r)}));
    std::vector<Vec2> sample(p.size());
    for (auto& s : sample) {
      s.e = rng.uniform(boundary.e_min, boundary.e_max);
      s.n = rng.uniform(boundary.n_min, boundary.n_max);
    }
    acc += emd_sliced(p, sample, n_projections,
                      derive_seed(seed, {0x9d0fULL, static_cast<std::uint64_t>(r)}));
  }
  return acc / static_cast<double>(n_realizations);
}

}  // namespace fedmap
