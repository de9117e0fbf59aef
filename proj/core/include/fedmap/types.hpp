#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedmap {

struct Vec2 {
  double e = 0.0;  // easting / first feature
  double n = 0.0;  // northing / second feature

  Vec2() = default;
  Vec2(double e_, double n_) : e(e_), n(n_) {}

  Vec2 operator+(const Vec2& o) const { return {e + o.e, n + o.n}; }
  Vec2 operator-(const Vec2& o) const { return {e - o.e, n - o.n}; }
  Vec2 operator*(double s) const { return {e * s, n * s}; }
  double norm() const { return std::hypot(e, n); }
};

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// One training point in standardized feature space.
struct Sample {
  std::array<double, 2> x{0.0, 0.0};
  double y = 0.0;
};

// One geotagged RSRP measurement. Easting/northing are filled by the UTM
// projection at ingestion time; lat/lon stay around for GeoJSON export.
struct Measurement {
  double lat = 0.0;
  double lon = 0.0;
  double easting = 0.0;
  double northing = 0.0;
  double rsrp = 0.0;
  std::int64_t timestamp = 0;  // seconds since epoch
  int user_id = 0;
  std::string cell_id;
};

// Axis-aligned rectangle in UTM meters (the attacker's area of interest).
struct Boundary {
  double e_min = 0.0;
  double n_min = 0.0;
  double e_max = 0.0;
  double n_max = 0.0;

  bool contains(const Vec2& p) const {
    return p.e >= e_min && p.e <= e_max && p.n >= n_min && p.n <= n_max;
  }
  double width() const { return e_max - e_min; }
  double height() const { return n_max - n_min; }
  bool valid() const { return width() > 0.0 && height() > 0.0; }
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a gradient needed as a matching signal has (numerically) zero
// norm, or when Assumption-style preconditions on |g-bar| fail.
struct DegenerateGradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssumptionViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelectionEmptyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fedmap
