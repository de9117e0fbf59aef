#include "fedmap/batch.hpp"

namespace fedmap {

Vec2 LocalBatch::centroid() const {
  if (points.empty()) throw DataError("centroid of empty batch");
  Vec2 sum;
  for (const auto& m : points) {
    sum.e += m.easting;
    sum.n += m.northing;
  }
  double inv = 1.0 / static_cast<double>(points.size());
  return {sum.e * inv, sum.n * inv};
}

Vec2 LocalBatch::coord_variance() const {
  Vec2 c = centroid();
  Vec2 acc;
  for (const auto& m : points) {
    double de = m.easting - c.e;
    double dn = m.northing - c.n;
    acc.e += de * de;
    acc.n += dn * dn;
  }
  double inv = 1.0 / static_cast<double>(points.size());
  return {acc.e * inv, acc.n * inv};
}

std::vector<Vec2> LocalBatch::locations() const {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& m : points) out.push_back({m.easting, m.northing});
  return out;
}

}  // namespace fedmap
