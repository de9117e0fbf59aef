#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedmap/types.hpp"

namespace fedmap {

// Measurement store for one cell tower. Rows are kept sorted by
// (user_id, timestamp); the test flags are parallel to rows.
struct Dataset {
  std::vector<Measurement> rows;
  std::vector<bool> is_test;  // empty means everything is train
  int utm_zone = 0;
  bool utm_north = true;
  std::string cell_id;

  void sort_rows();

  bool row_is_test(std::size_t i) const {
    return !is_test.empty() && is_test[i];
  }

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;
  std::vector<int> users() const;
  std::size_t size() const { return rows.size(); }
};

// Deterministic pseudo-random holdout split.
void assign_split(Dataset& ds, double test_fraction, std::uint64_t seed);

// Feature/label standardization fitted on the train split:
// z = (v - mean) / std per dimension, population std.
struct Standardizer {
  double mean_e = 0.0, std_e = 1.0;
  double mean_n = 0.0, std_n = 1.0;
  double mean_y = 0.0, std_y = 1.0;
  bool fitted = false;

  static Standardizer fit(const Dataset& ds);

  std::array<double, 2> transform_xy(const Vec2& utm) const {
    return {(utm.e - mean_e) / std_e, (utm.n - mean_n) / std_n};
  }
  Vec2 invert_xy(const std::array<double, 2>& z) const {
    return {z[0] * std_e + mean_e, z[1] * std_n + mean_n};
  }
  double transform_label(double rsrp) const { return (rsrp - mean_y) / std_y; }
  double invert_label(double z) const { return z * std_y + mean_y; }

  Sample to_sample(const Measurement& m) const {
    Sample s;
    s.x = transform_xy({m.easting, m.northing});
    s.y = transform_label(m.rsrp);
    return s;
  }
};

std::vector<Sample> to_samples(const Standardizer& st,
                               std::span<const Measurement> rows);

}  // namespace fedmap
