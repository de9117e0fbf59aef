#include "fedmap/defenses.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "fedmap/log.hpp"

namespace fedmap {

ClusterAssignment dbscan(std::span<const Vec2> points, double eps, int min_pts) {
  if (eps <= 0.0) throw ConfigError("dbscan: eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
  const int n = static_cast<int>(points.size());
  const double eps_sq = eps * eps;

  auto neighbors_of = [&](int i) {
    std::vector<int> nb;
    for (int j = 0; j < n; ++j) {
      double de = points[i].e - points[j].e;
      double dn = points[i].n - points[j].n;
      if (de * de + dn * dn <= eps_sq) nb.push_back(j);
    }
    return nb;
  };

  ClusterAssignment out;
  out.labels.assign(n, -2);  // -2 unvisited, -1 noise
  int next_cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (out.labels[i] != -2) continue;
    auto nb = neighbors_of(i);
    if (static_cast<int>(nb.size()) < min_pts) {
      out.labels[i] = -1;
      continue;
    }
    int cid = next_cluster++;
    out.labels[i] = cid;
    std::deque<int> frontier(nb.begin(), nb.end());
    while (!frontier.empty()) {
      int j = frontier.front();
      frontier.pop_front();
      if (out.labels[j] == -1) out.labels[j] = cid;  // border point
      if (out.labels[j] != -2) continue;
      out.labels[j] = cid;
      auto nb_j = neighbors_of(j);
      if (static_cast<int>(nb_j.size()) >= min_pts) {
        frontier.insert(frontier.end(), nb_j.begin(), nb_j.end());
      }
    }
  }

  out.clusters.resize(next_cluster);
  for (int i = 0; i < n; ++i) {
    if (out.labels[i] >= 0) out.clusters[out.labels[i]].push_back(i);
  }
  out.centroids.resize(next_cluster);
  for (int c = 0; c < next_cluster; ++c) {
    Vec2 sum;
    for (int i : out.clusters[c]) {
      sum.e += points[i].e;
      sum.n += points[i].n;
    }
    double inv = 1.0 / static_cast<double>(out.clusters[c].size());
    out.centroids[c] = {sum.e * inv, sum.n * inv};
  }
  return out;
}

namespace {

// member of `cluster` nearest to its centroid; ties resolved by lowest index
int medoid_index(const std::vector<int>& cluster, const Vec2& centroid,
                 std::span<const Vec2> points) {
  int best = cluster.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (int i : cluster) {
    double d = distance(points[i], centroid);
    if (d < best_d || (d == best_d && i < best)) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

LocalBatch subset(const LocalBatch& batch, std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  LocalBatch out;
  out.round = batch.round;
  out.user = batch.user;
  out.points.reserve(indices.size());
  for (int i : indices) out.points.push_back(batch.points[i]);
  return out;
}

}  // namespace

LocalBatch diverse_batch(const LocalBatch& batch, double eps_m, int min_pts,
                         bool keep_noise) {
  if (batch.empty()) throw DataError("diverse_batch: empty batch");
  auto pts = batch.locations();
  auto clusters = dbscan(pts, eps_m, min_pts);

  std::vector<int> chosen;
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    chosen.push_back(
        medoid_index(clusters.clusters[c], clusters.centroids[c], pts));
  }
  if (keep_noise) {
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (clusters.labels[i] < 0) chosen.push_back(i);
    }
  }
  return subset(batch, std::move(chosen));
}

LocalBatch farthest_batch(const LocalBatch& batch, double eps_m, int num,
                          int min_pts) {
  if (batch.empty()) throw DataError("farthest_batch: empty batch");
  if (num < 1) throw ConfigError("farthest_batch: num must be >= 1");
  if (num > static_cast<int>(batch.size())) {
    log::warn("farthest_batch: num exceeds batch size, using whole batch");
  }

  auto pts = batch.locations();
  auto assignment = dbscan(pts, eps_m, min_pts);
  Vec2 full_centroid = batch.centroid();

  // noise points act as singleton clusters so every point is rankable
  std::vector<std::vector<int>> clusters = assignment.clusters;
  std::vector<Vec2> centroids = assignment.centroids;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if (assignment.labels[i] < 0) {
      clusters.push_back({i});
      centroids.push_back(pts[i]);
    }
  }

  std::vector<int> order(clusters.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double da = distance(centroids[a], full_centroid);
    double db = distance(centroids[b], full_centroid);
    if (da != db) return da > db;
    return clusters[a].front() < clusters[b].front();
  });

  std::vector<int> chosen;
  for (int c : order) {
    if (static_cast<int>(chosen.size()) >= num) break;
    std::vector<int> members = clusters[c];
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      double da = distance(pts[a], centroids[c]);
      double db = distance(pts[b], centroids[c]);
      if (da != db) return da < db;
      return a < b;
    });
    for (int i : members) {
      if (static_cast<int>(chosen.size()) >= num) break;
      chosen.push_back(i);
    }
  }
  return subset(batch, std::move(chosen));
}

void DpConfig::validate() const {
  if (clip_norm <= 0.0) throw ConfigError("dp: clip_norm must be positive");
  if (epsilon <= 0.0) throw ConfigError("dp: epsilon must be positive");
  if (delta <= 0.0 || delta >= 1.0) throw ConfigError("dp: delta must lie in (0, 1)");
}

GradientVector clip_gradient(const GradientVector& grad, double clip_norm) {
  if (clip_norm <= 0.0) throw ConfigError("clip_gradient: clip_norm must be positive");
  double norm = grad.norm();
  if (norm <= clip_norm) return grad;
  GradientVector out = grad;
  double scale = clip_norm / norm;
  for (double& v : out.values) v *= scale;
  return out;
}

GradientVector gaussian_mechanism(const GradientVector& grad, const DpConfig& dp,
                                  Rng& rng) {
  dp.validate();
  GradientVector out = clip_gradient(grad, dp.clip_norm);
  double sigma = dp.sigma();
  for (double& v : out.values) v += sigma * rng.next_gaussian();
  return out;
}

}  // namespace fedmap
