#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedmap/attack.hpp"
#include "fedmap/batch.hpp"
#include "fedmap/types.hpp"

namespace fedmap {

// Exact 1-D Wasserstein-1 between two empirical distributions (uniform mass),
// via the quantile-function integral. Handles unequal sizes.
double wasserstein_1d(std::span<const double> p, std::span<const double> q);

// Sliced Earth Mover's Distance: mean over random unit directions of the 1-D
// Wasserstein-1 distance between the projected point sets. Meters on UTM
// coordinates. Deterministic given the seed.
double emd_sliced(std::span<const Vec2> p, std::span<const Vec2> q,
                  int n_projections, std::uint64_t seed);

double divergence_rate(std::span<const AttackResult> results);

double centroid_distance(const AttackResult& result, const LocalBatch& batch);

// EMD between p and uniformly random same-size point sets inside the
// boundary, averaged over n_realizations draws.
double random_baseline_emd(std::span<const Vec2> p, const Boundary& boundary,
                           int n_realizations, int n_projections,
                           std::uint64_t seed);

}  // namespace fedmap
