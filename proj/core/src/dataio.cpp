#include "fedmap/dataio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedmap/fed.hpp"
#include "fedmap/log.hpp"
#include "fedmap/rng.hpp"

#include "json.hpp"

namespace fedmap {

namespace {

constexpr std::int64_t kEpochBase = 1600000000;  // fixed synthetic time origin

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  try {
    std::size_t pos = 0;
    out = std::stoll(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

LoadResult load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw DataError("bad header, expected '" + std::string(kCsvHeader) + "'");
  }

  LoadResult result;
  Dataset& ds = result.dataset;
  int line_no = 1;
  bool zone_set = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    auto reject = [&](const std::string& why) {
      result.rejected.push_back({line_no, why});
      log::warn("line " + std::to_string(line_no) + " rejected: " + why);
    };
    if (fields.size() != 6) {
      reject("expected 6 fields, got " + std::to_string(fields.size()));
      continue;
    }
    Measurement m;
    std::int64_t user = 0;
    if (!parse_int64(fields[0], user)) {
      reject("bad user_id");
      continue;
    }
    m.user_id = static_cast<int>(user);
    m.cell_id = fields[1];
    if (!parse_int64(fields[2], m.timestamp)) {
      reject("bad timestamp");
      continue;
    }
    if (!parse_double(fields[3], m.lat) || std::fabs(m.lat) > 90.0) {
      reject("bad lat");
      continue;
    }
    if (!parse_double(fields[4], m.lon) || std::fabs(m.lon) > 180.0) {
      reject("bad lon");
      continue;
    }
    if (!parse_double(fields[5], m.rsrp)) {
      reject("bad rsrp");
      continue;
    }
    UtmPoint p;
    try {
      p = to_utm(m.lat, m.lon);
    } catch (const DataError& e) {
      reject(e.what());
      continue;
    }
    if (!zone_set) {
      ds.utm_zone = p.zone;
      ds.utm_north = p.north;
      zone_set = true;
    } else if (p.zone != ds.utm_zone || p.north != ds.utm_north) {
      throw DataError("dataset spans more than one UTM zone (line " +
                      std::to_string(line_no) + ")");
    }
    m.easting = p.easting;
    m.northing = p.northing;
    if (ds.cell_id.empty()) ds.cell_id = m.cell_id;
    ds.rows.push_back(std::move(m));
  }
  if (ds.rows.empty()) throw DataError("no valid rows in " + path);
  for (const auto& m : ds.rows) {
    if (m.cell_id != ds.cell_id) {
      log::warn("multiple cell ids present; the run models a single cell (" +
                ds.cell_id + ")");
      break;
    }
  }
  ds.sort_rows();
  return result;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << kCsvHeader << "\n";
  char buf[256];
  for (const auto& m : ds.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%lld,%.7f,%.7f,%.4f", m.user_id,
                  m.cell_id.c_str(), static_cast<long long>(m.timestamp), m.lat,
                  m.lon, m.rsrp);
    out << buf << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

void SynthConfig::validate() const {
  if (n_users < 1) throw ConfigError("synth: need at least one user");
  if (anchors_per_user < 1) throw ConfigError("synth: need at least one anchor");
  if (weeks < 1) throw ConfigError("synth: need at least one week");
  if (samples_per_hour < 1 || commute_samples_per_hour < 1) {
    throw ConfigError("synth: sample rates must be >= 1");
  }
  if (active_hours.empty()) throw ConfigError("synth: no active hours");
  for (int h : active_hours) {
    if (h < 0 || h > 23) throw ConfigError("synth: active hour outside 0..23");
  }
  if (sigma_path_m < 0 || dwell_offset_m < 0 || gps_noise_m < 0 ||
      sigma_shadow_db < 0 || quantize_deg < 0) {
    throw ConfigError("synth: noise scales must be >= 0");
  }
  for (double s : anchor_spread_m) {
    if (s < 0) throw ConfigError("synth: anchor spreads must be >= 0");
  }
  if (user_similarity < 0.0 || user_similarity > 1.0) {
    throw ConfigError("synth: user_similarity must lie in [0, 1]");
  }
  if (area_radius_m <= 0.0) throw ConfigError("synth: area radius must be positive");
  if (d0_m <= 0.0) throw ConfigError("synth: d0 must be positive");
}

namespace {

// hour-of-day -> anchor occupancy probabilities; rows sum to 1
std::array<std::vector<double>, 24> default_schedule(int anchors) {
  std::array<std::vector<double>, 24> sched;
  for (int h = 0; h < 24; ++h) {
    std::vector<double> probs(anchors, 0.0);
    if (anchors == 1) {
      probs[0] = 1.0;
    } else if (h <= 7 || h >= 19) {
      probs[0] = 1.0;  // home
    } else if (h == 8 || h == 18) {
      probs[0] = 0.5;
      probs[1] = 0.5;
    } else {
      for (int a = 1; a < anchors; ++a) {
        probs[a] = 1.0 / static_cast<double>(anchors - 1);
      }
    }
    sched[h] = std::move(probs);
  }
  return sched;
}

int draw_anchor(const std::vector<double>& probs, Rng& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

Dataset synth_trajectories(const SynthConfig& cfg) {
  cfg.validate();

  UtmPoint base = to_utm(cfg.base_lat, cfg.base_lon);
  Vec2 tower{base.easting + cfg.tower_east_m, base.northing + cfg.tower_north_m};

  // shared anchor constellation on a ring, then per-user scatter blended in by
  // (1 - similarity)
  std::vector<Vec2> shared(cfg.anchors_per_user);
  for (int a = 0; a < cfg.anchors_per_user; ++a) {
    double angle = 0.7 + 2.399963229728653 * a;  // golden-angle spacing
    shared[a] = {base.easting + 0.55 * cfg.area_radius_m * std::cos(angle),
                 base.northing + 0.55 * cfg.area_radius_m * std::sin(angle)};
  }

  Dataset ds;
  ds.utm_zone = base.zone;
  ds.utm_north = base.north;
  ds.cell_id = cfg.cell_id;

  std::vector<bool> hour_active(24, false);
  for (int h : cfg.active_hours) hour_active[h] = true;
  auto schedule = default_schedule(cfg.anchors_per_user);

  for (int user = 0; user < cfg.n_users; ++user) {
    Rng rng(derive_seed(cfg.seed, {0x7127ULL, static_cast<std::uint64_t>(user)}));

    std::vector<Vec2> anchors(cfg.anchors_per_user);
    for (int a = 0; a < cfg.anchors_per_user; ++a) {
      double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
      double radius = cfg.area_radius_m * (0.3 + 0.7 * rng.next_double());
      Vec2 own{base.easting + radius * std::cos(angle),
               base.northing + radius * std::sin(angle)};
      double s = cfg.user_similarity;
      anchors[a] = {shared[a].e * s + own.e * (1.0 - s),
                    shared[a].n * s + own.n * (1.0 - s)};
    }

    int prev_anchor = 0;
    const int days = cfg.weeks * 7;
    for (int day = 0; day < days; ++day) {
      for (int hour = 0; hour < 24; ++hour) {
        int anchor = draw_anchor(schedule[hour], rng);
        bool commuting = anchor != prev_anchor;
        if (hour_active[hour]) {
          int k = commuting ? cfg.commute_samples_per_hour : cfg.samples_per_hour;
          Vec2 from = anchors[prev_anchor];
          Vec2 to = anchors[anchor];
          double spread = cfg.dwell_offset_m;
          if (!cfg.anchor_spread_m.empty()) {
            std::size_t a = std::min<std::size_t>(
                anchor, cfg.anchor_spread_m.size() - 1);
            spread = cfg.anchor_spread_m[a];
          }
          Vec2 dwell_offset{spread * rng.next_gaussian(),
                            spread * rng.next_gaussian()};
          for (int j = 0; j < k; ++j) {
            Vec2 pos;
            if (commuting) {
              double f = (j + 0.5) / static_cast<double>(k);
              pos = {from.e + f * (to.e - from.e) +
                         cfg.sigma_path_m * rng.next_gaussian(),
                     from.n + f * (to.n - from.n) +
                         cfg.sigma_path_m * rng.next_gaussian()};
            } else {
              pos = {to.e + dwell_offset.e + cfg.gps_noise_m * rng.next_gaussian(),
                     to.n + dwell_offset.n + cfg.gps_noise_m * rng.next_gaussian()};
            }

            double d = distance(pos, tower);
            double rsrp = cfg.p0_dbm -
                          10.0 * cfg.path_loss_exp *
                              std::log10(std::max(d, cfg.d0_m) / cfg.d0_m) +
                          cfg.sigma_shadow_db * rng.next_gaussian();

            LatLon ll = utm_to_latlon({pos.e, pos.n, base.zone, base.north});
            if (cfg.quantize_deg > 0.0) {
              ll.lat = std::round(ll.lat / cfg.quantize_deg) * cfg.quantize_deg;
              ll.lon = std::round(ll.lon / cfg.quantize_deg) * cfg.quantize_deg;
            }
            UtmPoint p = to_utm_zone(ll.lat, ll.lon, base.zone, base.north);

            Measurement m;
            m.lat = ll.lat;
            m.lon = ll.lon;
            m.easting = p.easting;
            m.northing = p.northing;
            m.rsrp = rsrp;
            m.timestamp = kEpochBase +
                          (static_cast<std::int64_t>(day) * 24 + hour) * 3600 +
                          static_cast<std::int64_t>(
                              std::floor(3600.0 * (j + 0.5) / k));
            m.user_id = user;
            m.cell_id = cfg.cell_id;
            ds.rows.push_back(std::move(m));
          }
        }
        prev_anchor = anchor;
      }
    }
  }
  ds.sort_rows();
  return ds;
}

SummaryStats summarize(const Dataset& ds, double t_hours) {
  SummaryStats stats;
  auto part = partition_rounds(ds, t_hours);
  for (const auto& [user, batches] : part.by_user) {
    UserBatchStats u;
    u.user = user;
    u.batches = static_cast<int>(batches.size());
    u.min_size = batches.empty() ? 0 : batches.front().size();
    for (const auto& b : batches) {
      u.total += b.size();
      u.min_size = std::min(u.min_size, b.size());
      u.max_size = std::max(u.max_size, b.size());
    }
    u.mean_size = batches.empty()
                      ? 0.0
                      : static_cast<double>(u.total) / static_cast<double>(u.batches);
    stats.total += u.total;
    stats.per_user.push_back(u);
  }
  return stats;
}

void write_geojson(const std::string& path, const std::vector<GeoPoint>& points,
                   int utm_zone, bool utm_north) {
  nlohmann::ordered_json features = nlohmann::ordered_json::array();
  for (const auto& p : points) {
    LatLon ll = utm_to_latlon({p.utm.e, p.utm.n, utm_zone, utm_north});
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {ll.lon, ll.lat}}};
    f["properties"] = {{"kind", p.kind}, {"round", p.round}};
    features.push_back(std::move(f));
  }
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace fedmap
