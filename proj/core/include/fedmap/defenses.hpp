#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fedmap/batch.hpp"
#include "fedmap/rng.hpp"
#include "fedmap/types.hpp"
#include "fedmap/weights.hpp"

namespace fedmap {

struct ClusterAssignment {
  std::vector<int> labels;                 // cluster id >= 0, or -1 for noise
  std::vector<std::vector<int>> clusters;  // member indices per cluster
  std::vector<Vec2> centroids;

  int noise_count() const {
    int n = 0;
    for (int l : labels) n += (l < 0);
    return n;
  }
};

// Plain density-based clustering: core points have >= min_pts neighbors
// (self included) within eps; clusters are maximal density-connected sets.
ClusterAssignment dbscan(std::span<const Vec2> points, double eps, int min_pts);

// Diverse Batch: one medoid per DBSCAN cluster. Noise points are kept as
// singleton clusters unless keep_noise is false. Selection runs once.
LocalBatch diverse_batch(const LocalBatch& batch, double eps_m, int min_pts = 1,
                         bool keep_noise = true);

// Farthest Batch: clusters sorted by decreasing distance between their
// centroid and the full-batch centroid; points taken farthest-cluster-first
// until num selected, nearest-to-own-centroid first within a cluster.
LocalBatch farthest_batch(const LocalBatch& batch, double eps_m, int num,
                          int min_pts = 1);

struct DpConfig {
  double clip_norm = 1.0;  // C
  double epsilon = 1.0;
  double delta = 1e-5;

  double sigma() const {
    return std::sqrt(2.0 * std::log(1.25 / delta)) * clip_norm / epsilon;
  }
  void validate() const;
};

GradientVector clip_gradient(const GradientVector& grad, double clip_norm);

// Fixed clipping followed by i.i.d. N(0, sigma^2) per coordinate.
GradientVector gaussian_mechanism(const GradientVector& grad, const DpConfig& dp,
                                  Rng& rng);

}  // namespace fedmap
