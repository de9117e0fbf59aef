#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fedmap/dataio.hpp"
#include "fedmap/geo.hpp"
#include "fedmap/metrics.hpp"
#include "fedmap/rng.hpp"
#include "oracles.hpp"

#include "json.hpp"

using namespace fedmap;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

SynthConfig quiet_config() {
  SynthConfig cfg;
  cfg.n_users = 1;
  cfg.anchors_per_user = 1;
  cfg.weeks = 1;
  cfg.samples_per_hour = 4;
  cfg.commute_samples_per_hour = 2;
  cfg.sigma_path_m = 0.0;
  cfg.dwell_offset_m = 0.0;
  cfg.gps_noise_m = 0.0;
  cfg.sigma_shadow_db = 0.0;
  cfg.quantize_deg = 0.0;
  return cfg;
}

}  // namespace

TEST_SUITE("geo") {

TEST_CASE("equator point on the central meridian maps to the false easting") {
  auto p = to_utm(0.0, -3.0);  // zone 30 central meridian
  CHECK(p.zone == 30);
  CHECK(p.easting == doctest::Approx(500000.0).epsilon(1e-9));
  CHECK(p.northing == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("matches an independent Snyder-series converter to < 1 m") {
  // London area plus random in-zone samples
  auto london = to_utm(51.5074, -0.1278);
  auto ref = oracles::snyder_utm(51.5074, -0.1278, london.zone);
  CHECK(std::fabs(london.easting - ref.easting) < 1.0);
  CHECK(std::fabs(london.northing - ref.northing) < 1.0);

  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    double lat = rng.uniform(-80.0, 84.0);
    double zone_cm = 6.0 * static_cast<double>(1 + rng.next_below(60)) - 183.0;
    double lon = zone_cm + rng.uniform(-2.8, 2.8);
    auto got = to_utm(lat, lon);
    auto want = oracles::snyder_utm(lat, lon, got.zone);
    CHECK(std::fabs(got.easting - want.easting) < 1.0);
    CHECK(std::fabs(got.northing - want.northing) < 1.0);
  }
}

TEST_CASE("1 km geodesic step along a meridian moves ~1000 m of northing") {
  double lat = 40.0;
  double lon = -2.0;  // about 1 degree off the zone 30 central meridian
  double dlat = 1000.0 / oracles::meridional_radius(40.0) * 180.0 /
                3.14159265358979323846;
  auto a = to_utm(lat, lon);
  auto b = to_utm(lat + dlat, lon);
  CHECK(b.zone == a.zone);
  CHECK(std::fabs((b.northing - a.northing) - 1000.0) < 1.0);
}

TEST_CASE("round trip returns lat/lon within 1e-7 degrees") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    double lat = rng.uniform(-84.0, 84.0);
    double zone_cm = 6.0 * static_cast<double>(1 + rng.next_below(60)) - 183.0;
    double lon = zone_cm + rng.uniform(-3.0, 3.0);
    auto p = to_utm(lat, lon);
    auto ll = utm_to_latlon(p);
    CHECK(std::fabs(ll.lat - lat) < 1e-7);
    CHECK(std::fabs(ll.lon - lon) < 1e-7);
  }
}

TEST_CASE("latitudes beyond the supported band are rejected") {
  CHECK_THROWS_AS(to_utm(85.0, 10.0), DataError);
  CHECK_THROWS_AS(to_utm(-86.0, 10.0), DataError);
}

}  // TEST_SUITE

TEST_SUITE("dataio") {

TEST_CASE("load_csv: valid rows parsed and sorted") {
  auto path = temp_path("fedmap_ok.csv");
  write_file(path,
             "user_id,cell_id,timestamp,lat,lon,rsrp\n"
             "1,c1,2000,40.0,-3.0,-80\n"
             "0,c1,1000,40.001,-3.001,-85\n"
             "0,c1,500,40.002,-3.002,-90\n");
  auto result = load_csv(path);
  REQUIRE(result.dataset.rows.size() == 3);
  CHECK(result.rejected.empty());
  CHECK(result.dataset.rows[0].user_id == 0);
  CHECK(result.dataset.rows[0].timestamp == 500);
  CHECK(result.dataset.rows[1].timestamp == 1000);
  CHECK(result.dataset.rows[2].user_id == 1);
  CHECK(result.dataset.utm_zone == 30);
}

TEST_CASE("load_csv: out-of-range latitude is rejected with its line number") {
  auto path = temp_path("fedmap_badlat.csv");
  write_file(path,
             "user_id,cell_id,timestamp,lat,lon,rsrp\n"
             "0,c1,1,40.0,-3.0,-80\n"
             "0,c1,2,91.0,-3.0,-80\n");
  auto result = load_csv(path);
  CHECK(result.dataset.rows.size() == 1);
  REQUIRE(result.rejected.size() == 1);
  CHECK(result.rejected[0].line == 3);
}

TEST_CASE("load_csv: duplicated rows are kept") {
  auto path = temp_path("fedmap_dup.csv");
  write_file(path,
             "user_id,cell_id,timestamp,lat,lon,rsrp\n"
             "0,c1,1,40.0,-3.0,-80\n"
             "0,c1,1,40.0,-3.0,-80\n");
  auto result = load_csv(path);
  CHECK(result.dataset.rows.size() == 2);
}

TEST_CASE("load_csv: bad header, empty file, missing file") {
  auto bad = temp_path("fedmap_badhdr.csv");
  write_file(bad, "lat,lon\n1,2\n");
  CHECK_THROWS_AS(load_csv(bad), DataError);

  auto empty = temp_path("fedmap_empty.csv");
  write_file(empty, "");
  CHECK_THROWS_AS(load_csv(empty), DataError);

  CHECK_THROWS_AS(load_csv(temp_path("fedmap_nope.csv")), DataError);
}

TEST_CASE("load_csv: cross-zone datasets are refused") {
  auto path = temp_path("fedmap_zones.csv");
  write_file(path,
             "user_id,cell_id,timestamp,lat,lon,rsrp\n"
             "0,c1,1,40.0,-3.0,-80\n"
             "0,c1,2,40.0,3.0,-80\n");
  CHECK_THROWS_AS(load_csv(path), DataError);
}

TEST_CASE("csv round trip preserves rows") {
  SynthConfig cfg = quiet_config();
  cfg.sigma_shadow_db = 1.0;
  cfg.gps_noise_m = 2.0;
  auto ds = synth_trajectories(cfg);
  auto path = temp_path("fedmap_rt.csv");
  write_csv(ds, path);
  auto back = load_csv(path);
  REQUIRE(back.dataset.rows.size() == ds.rows.size());
  CHECK(back.rejected.empty());
  for (std::size_t i = 0; i < ds.rows.size(); i += 37) {
    CHECK(back.dataset.rows[i].timestamp == ds.rows[i].timestamp);
    CHECK(back.dataset.rows[i].lat == doctest::Approx(ds.rows[i].lat).epsilon(1e-7));
  }
}

TEST_CASE("synth: identical config gives identical datasets") {
  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.weeks = 1;
  cfg.samples_per_hour = 6;
  auto a = synth_trajectories(cfg);
  auto b = synth_trajectories(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].easting == b.rows[i].easting);
    CHECK(a.rows[i].rsrp == b.rows[i].rsrp);
    CHECK(a.rows[i].timestamp == b.rows[i].timestamp);
  }
}

TEST_CASE("synth: all noise off, single anchor pins every point to the anchor") {
  SynthConfig cfg = quiet_config();
  auto ds = synth_trajectories(cfg);
  REQUIRE_FALSE(ds.rows.empty());
  double e0 = ds.rows.front().easting;
  double n0 = ds.rows.front().northing;
  double r0 = ds.rows.front().rsrp;
  for (const auto& m : ds.rows) {
    CHECK(m.easting == doctest::Approx(e0).epsilon(1e-9));
    CHECK(m.northing == doctest::Approx(n0).epsilon(1e-9));
    CHECK(m.rsrp == doctest::Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("synth: RSRP at the reference distance equals p0") {
  SynthConfig cfg = quiet_config();
  // place the tower exactly on the single shared anchor
  double angle = 0.7;
  cfg.tower_east_m = 0.55 * cfg.area_radius_m * std::cos(angle);
  cfg.tower_north_m = 0.55 * cfg.area_radius_m * std::sin(angle);
  auto ds = synth_trajectories(cfg);
  for (const auto& m : ds.rows) {
    CHECK(m.rsrp == doctest::Approx(cfg.p0_dbm).epsilon(1e-12));
  }
}

TEST_CASE("synth: RSRP decreases with distance from the tower when noiseless") {
  SynthConfig cfg = quiet_config();
  cfg.anchors_per_user = 2;
  cfg.sigma_path_m = 40.0;  // spread along commutes gives distance variety
  cfg.weeks = 1;
  auto ds = synth_trajectories(cfg);
  UtmPoint base = to_utm(cfg.base_lat, cfg.base_lon);
  Vec2 tower{base.easting, base.northing};
  for (std::size_t i = 1; i < ds.rows.size(); ++i) {
    double di = distance({ds.rows[i].easting, ds.rows[i].northing}, tower);
    double dj = distance({ds.rows[i - 1].easting, ds.rows[i - 1].northing}, tower);
    double ri = ds.rows[i].rsrp;
    double rj = ds.rows[i - 1].rsrp;
    if (di > dj + 1e-9) CHECK(ri <= rj + 1e-9);
    if (di < dj - 1e-9) CHECK(ri >= rj - 1e-9);
  }
}

TEST_CASE("synth: anchor similarity drives pairwise trajectory EMD") {
  SynthConfig shared;
  shared.n_users = 2;
  shared.weeks = 1;
  shared.samples_per_hour = 8;
  shared.commute_samples_per_hour = 4;
  shared.user_similarity = 1.0;
  shared.seed = 3;
  auto same = synth_trajectories(shared);

  SynthConfig scattered = shared;
  scattered.user_similarity = 0.0;
  auto diff = synth_trajectories(scattered);

  auto points_of = [](const Dataset& ds, int user) {
    std::vector<Vec2> pts;
    for (const auto& m : ds.rows) {
      if (m.user_id == user) pts.push_back({m.easting, m.northing});
    }
    return pts;
  };
  double emd_same =
      emd_sliced(points_of(same, 0), points_of(same, 1), 200, 9);
  double emd_diff =
      emd_sliced(points_of(diff, 0), points_of(diff, 1), 200, 9);
  CHECK(emd_diff > 4.0 * emd_same);
}

TEST_CASE("summarize: uniform stream and recount") {
  Dataset ds;
  for (int i = 0; i < 20; ++i) {
    Measurement m;
    m.user_id = 0;
    m.timestamp = i * 360;  // 10 per hour across 2 hours
    m.easting = i;
    m.northing = i;
    ds.rows.push_back(m);
  }
  auto stats = summarize(ds, 1.0);
  REQUIRE(stats.per_user.size() == 1);
  CHECK(stats.per_user[0].batches == 2);
  CHECK(stats.per_user[0].min_size == 10);
  CHECK(stats.per_user[0].max_size == 10);
  CHECK(stats.total == 20);

  SynthConfig cfg;
  cfg.n_users = 2;
  cfg.weeks = 1;
  cfg.samples_per_hour = 5;
  auto synth = synth_trajectories(cfg);
  auto synth_stats = summarize(synth, 24.0);
  CHECK(synth_stats.total == synth.rows.size());
}

TEST_CASE("summarize: user with no rows yields no batches") {
  Dataset ds;
  Measurement m;
  m.user_id = 3;
  m.timestamp = 100;
  ds.rows.push_back(m);
  auto stats = summarize(ds, 1.0);
  CHECK(stats.per_user.size() == 1);
  CHECK(stats.per_user[0].user == 3);
}

TEST_CASE("geojson export round-trips through a JSON parser") {
  auto path = temp_path("fedmap_points.geojson");
  std::vector<GeoPoint> pts;
  auto base = to_utm(40.0, -3.7);
  pts.push_back({{base.easting, base.northing}, "true", 1});
  pts.push_back({{base.easting + 100.0, base.northing}, "reconstructed", 1});
  write_geojson(path, pts, base.zone, base.north);

  std::ifstream in(path);
  auto doc = nlohmann::json::parse(in);
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 2);
  CHECK(doc["features"][0]["properties"]["kind"] == "true");
  CHECK(doc["features"][1]["properties"]["round"] == 1);
  double lon = doc["features"][0]["geometry"]["coordinates"][0];
  CHECK(lon == doctest::Approx(-3.7).epsilon(1e-6));
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  cfg.n_users = 0;
  CHECK_THROWS_AS(synth_trajectories(cfg), ConfigError);
}

}  // TEST_SUITE
