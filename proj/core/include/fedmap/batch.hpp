#pragma once

#include <vector>

#include "fedmap/types.hpp"

namespace fedmap {

// The per-round training set D_t^k of one user. Centroid and coordinate
// variance are derived from the members, so the mean invariant holds by
// construction.
struct LocalBatch {
  int round = 0;
  int user = 0;
  std::vector<Measurement> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Vec2 centroid() const;
  Vec2 coord_variance() const;  // population variance per coordinate, m^2

  std::vector<Vec2> locations() const;
};

}  // namespace fedmap
