#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedmap/dataset.hpp"
#include "fedmap/geo.hpp"
#include "fedmap/types.hpp"

namespace fedmap {

inline constexpr const char* kCsvHeader = "user_id,cell_id,timestamp,lat,lon,rsrp";

struct RejectedRow {
  int line = 0;
  std::string reason;
};

struct LoadResult {
  Dataset dataset;
  std::vector<RejectedRow> rejected;
};

// Strict-schema CSV ingestion. Malformed rows are rejected (with line
// numbers); datasets spanning more than one UTM zone are refused outright.
LoadResult load_csv(const std::string& path);

void write_csv(const Dataset& ds, const std::string& path);

// --- synthetic mobility ------------------------------------------------------

// Home/work anchor mobility with commute paths in between, standing in for
// the private measurement datasets. RSRP labels follow a log-distance path
// loss model from the configured tower.
struct SynthConfig {
  int n_users = 6;
  int anchors_per_user = 2;
  int weeks = 12;

  int samples_per_hour = 80;         // while dwelling at an anchor
  int commute_samples_per_hour = 12; // while moving between anchors
  std::vector<int> active_hours{7, 8, 9, 12, 17, 18, 19};

  double sigma_path_m = 20.0;        // lateral noise along commute paths
  double dwell_offset_m = 15.0;      // per-hour offset of the dwell spot
  // per-anchor override of the dwell offset (anchors past the end reuse the
  // last entry); empty means dwell_offset_m everywhere
  std::vector<double> anchor_spread_m;
  double gps_noise_m = 1.5;          // per-sample jitter while dwelling
  double quantize_deg = 1e-5;        // reported-coordinate rounding; 0 = off

  double p0_dbm = -30.0;             // RSRP at reference distance d0
  double d0_m = 1.0;
  double path_loss_exp = 3.0;
  double sigma_shadow_db = 2.0;

  double base_lat = 40.0;
  double base_lon = -3.7;
  double area_radius_m = 1500.0;     // anchor constellation radius
  double tower_east_m = 0.0;         // tower offset from the base point
  double tower_north_m = 0.0;
  double user_similarity = 1.0;      // 1: shared anchors, 0: fully scattered

  std::string cell_id = "synth-0";
  std::uint64_t seed = 1;

  void validate() const;
};

Dataset synth_trajectories(const SynthConfig& cfg);

// --- summaries ---------------------------------------------------------------

struct UserBatchStats {
  int user = 0;
  int batches = 0;
  std::size_t total = 0;
  std::size_t min_size = 0;
  std::size_t max_size = 0;
  double mean_size = 0.0;
};

struct SummaryStats {
  std::vector<UserBatchStats> per_user;
  std::size_t total = 0;
};

SummaryStats summarize(const Dataset& ds, double t_hours);

// --- GeoJSON -----------------------------------------------------------------

struct GeoPoint {
  Vec2 utm;
  std::string kind;  // "true" | "reconstructed" | "selected"
  int round = 0;
};

void write_geojson(const std::string& path, const std::vector<GeoPoint>& points,
                   int utm_zone, bool utm_north);

}  // namespace fedmap
