#include "fedmap/geo.hpp"

#include <cmath>

namespace fedmap {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;

// WGS84
constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;

struct Series {
  double n;
  double radius;        // rectifying radius A
  double alpha[6];
  double beta[6];
  double e;             // first eccentricity
};

const Series& series() {
  static const Series s = [] {
    Series out{};
    double n = kF / (2.0 - kF);
    double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
    out.n = n;
    out.radius = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    out.alpha[0] = n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 -
                   127.0 * n5 / 288.0 + 7891.0 * n6 / 37800.0;
    out.alpha[1] = 13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 +
                   281.0 * n5 / 630.0 - 1983433.0 * n6 / 1935360.0;
    out.alpha[2] = 61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 +
                   167603.0 * n6 / 181440.0;
    out.alpha[3] = 49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 +
                   6601661.0 * n6 / 7257600.0;
    out.alpha[4] = 34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0;
    out.alpha[5] = 212378941.0 * n6 / 319334400.0;
    out.beta[0] = n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 -
                  81.0 * n5 / 512.0 + 96199.0 * n6 / 604800.0;
    out.beta[1] = n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0 -
                  1118711.0 * n6 / 3870720.0;
    out.beta[2] = 17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 +
                  5569.0 * n6 / 90720.0;
    out.beta[3] = 4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 -
                  830251.0 * n6 / 7257600.0;
    out.beta[4] = 4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0;
    out.beta[5] = 20648693.0 * n6 / 638668800.0;
    out.e = std::sqrt(kF * (2.0 - kF));
    return out;
  }();
  return s;
}

}  // namespace

int utm_zone_for(double lon_deg) {
  // normalize into [-180, 180)
  double lon = std::fmod(lon_deg + 180.0, 360.0);
  if (lon < 0.0) lon += 360.0;
  lon -= 180.0;
  int zone = static_cast<int>(std::floor((lon + 180.0) / 6.0)) + 1;
  if (zone > 60) zone = 60;
  return zone;
}

UtmPoint to_utm_zone(double lat_deg, double lon_deg, int zone, bool north) {
  if (std::fabs(lat_deg) > 84.0) {
    throw DataError("unsupported latitude for UTM (|lat| > 84)");
  }
  if (lon_deg < -180.0 || lon_deg > 180.0) {
    throw DataError("longitude outside [-180, 180]");
  }
  if (zone < 1 || zone > 60) throw DataError("UTM zone outside 1..60");

  const Series& s = series();
  double lat = lat_deg * kDegToRad;
  double lon0 = (zone * 6.0 - 183.0) * kDegToRad;
  double dlon = lon_deg * kDegToRad - lon0;

  double sphi = std::sin(lat);
  double r = 2.0 * std::sqrt(s.n) / (1.0 + s.n);
  double t = std::sinh(std::atanh(sphi) - r * std::atanh(r * sphi));
  double xi = std::atan2(t, std::cos(dlon));
  double eta = std::atanh(std::sin(dlon) / std::sqrt(1.0 + t * t));

  double xi_sum = xi;
  double eta_sum = eta;
  for (int j = 1; j <= 6; ++j) {
    xi_sum += s.alpha[j - 1] * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    eta_sum += s.alpha[j - 1] * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  UtmPoint out;
  out.zone = zone;
  out.north = north;
  out.easting = kFalseEasting + kK0 * s.radius * eta_sum;
  out.northing = kK0 * s.radius * xi_sum;
  if (!north) out.northing += kFalseNorthingSouth;
  return out;
}

UtmPoint to_utm(double lat_deg, double lon_deg) {
  return to_utm_zone(lat_deg, lon_deg, utm_zone_for(lon_deg), lat_deg >= 0.0);
}

LatLon utm_to_latlon(const UtmPoint& p) {
  if (p.zone < 1 || p.zone > 60) throw DataError("UTM zone outside 1..60");
  const Series& s = series();

  double northing = p.north ? p.northing : p.northing - kFalseNorthingSouth;
  double xi = northing / (kK0 * s.radius);
  double eta = (p.easting - kFalseEasting) / (kK0 * s.radius);

  double xi_p = xi;
  double eta_p = eta;
  for (int j = 1; j <= 6; ++j) {
    xi_p -= s.beta[j - 1] * std::sin(2.0 * j * xi) * std::cosh(2.0 * j * eta);
    eta_p -= s.beta[j - 1] * std::cos(2.0 * j * xi) * std::sinh(2.0 * j * eta);
  }

  double chi = std::asin(std::sin(xi_p) / std::cosh(eta_p));  // conformal latitude
  double e2 = s.e * s.e;
  double e4 = e2 * e2, e6 = e4 * e2, e8 = e6 * e2;
  double d1 = e2 / 2.0 + 5.0 * e4 / 24.0 + e6 / 12.0 + 13.0 * e8 / 360.0;
  double d2 = 7.0 * e4 / 48.0 + 29.0 * e6 / 240.0 + 811.0 * e8 / 11520.0;
  double d3 = 7.0 * e6 / 120.0 + 81.0 * e8 / 1120.0;
  double d4 = 4279.0 * e8 / 161280.0;
  double lat = chi + d1 * std::sin(2.0 * chi) + d2 * std::sin(4.0 * chi) +
               d3 * std::sin(6.0 * chi) + d4 * std::sin(8.0 * chi);

  double lon0 = (p.zone * 6.0 - 183.0) * kDegToRad;
  double lon = lon0 + std::atan2(std::sinh(eta_p), std::cos(xi_p));

  return {lat * kRadToDeg, lon * kRadToDeg};
}

}  // namespace fedmap
