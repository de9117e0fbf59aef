#pragma once

#include "fedmap/types.hpp"

namespace fedmap {

struct UtmPoint {
  double easting = 0.0;   // meters, false easting 500 000
  double northing = 0.0;  // meters, southern hemisphere offset 10 000 000
  int zone = 0;           // 1..60
  bool north = true;
};

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

// WGS84 transverse Mercator (Krueger series). Throws DataError for
// |lat| > 84 degrees or invalid longitudes.
UtmPoint to_utm(double lat_deg, double lon_deg);

// Same projection forced into a specific zone (for datasets straddling a
// nominal zone edge the caller decides; we use the zone of the first row).
UtmPoint to_utm_zone(double lat_deg, double lon_deg, int zone, bool north);

LatLon utm_to_latlon(const UtmPoint& p);

int utm_zone_for(double lon_deg);

}  // namespace fedmap
