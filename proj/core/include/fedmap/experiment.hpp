#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fedmap/config.hpp"
#include "fedmap/fed.hpp"

namespace fedmap {

struct BuiltData {
  Dataset ds;
  Standardizer st;
  Boundary boundary;
};

// Dataset from the configured source (+split, standardizer) and the attack
// boundary (auto = bounding box of all locations plus the margin).
BuiltData build_data(const ExperimentConfig& cfg);

// One results.csv row; cumulative-to-round metrics, so a group's last round
// carries the table entry. NaN renders as an empty cell.
struct ResultRow {
  std::string scheme;
  int round = 0;
  std::string minibatch;  // integer or "inf"
  int epochs = 0;
  double t_hours = 0.0;
  double eps_km = std::numeric_limits<double>::quiet_NaN();
  double num = std::numeric_limits<double>::quiet_NaN();
  double dp_epsilon = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double emd_m = std::numeric_limits<double>::quiet_NaN();
  double diverged_frac = std::numeric_limits<double>::quiet_NaN();
  double centroid_dist_m = std::numeric_limits<double>::quiet_NaN();
  double dlg_iters = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kResultsHeader =
    "scheme,round,B,E,T_hours,eps_km,num,dp_epsilon,rmse,emd_m,diverged_frac,"
    "centroid_dist_m,dlg_iters";

struct PointOutcome {
  SweepPoint point;
  ExperimentResult result;
  std::vector<ResultRow> rows;
};

PointOutcome run_sweep_point(const SweepPoint& point, const BuiltData& data,
                             std::uint64_t master_seed);

struct RunPaths {
  std::string results_csv;
  std::string trace_csv;
  std::string attacks_csv;
  std::vector<std::string> geojson;
};

// The `run` subcommand: expand the sweep, execute points (up to `jobs`
// concurrently, each on its own derived RNG stream), write results/trace/
// attacks CSVs and one GeoJSON per sweep point.
RunPaths cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
                 int jobs);

// The `synth` subcommand: generate and write the synthetic dataset.
std::string cmd_synth(const ExperimentConfig& cfg, const std::string& out_path);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

struct VerifyOptions {
  int oracle_instances = 50;
  int bound_batches = 100;
  int gradient_probes = 100;
  bool inject_identity_fault = false;  // mutation hook: corrupts the
                                       // covariance identity on purpose
};

// Oracle-agreement, bound-domination and gradient-check suites.
VerifyReport cmd_verify(const ExperimentConfig& cfg, const VerifyOptions& opts);

void print_verify_report(const VerifyReport& report);

// --- report --------------------------------------------------------------

struct ReportGroup {
  std::string scheme;
  std::string minibatch;
  std::string epochs;
  std::string t_hours;
  std::string eps_km;
  std::string num;
  std::string dp_epsilon;
  int final_round = 0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double emd_m = std::numeric_limits<double>::quiet_NaN();
  double diverged_frac = std::numeric_limits<double>::quiet_NaN();
  double centroid_dist_m = std::numeric_limits<double>::quiet_NaN();
  double dlg_iters = std::numeric_limits<double>::quiet_NaN();
  double mean_rmse = std::numeric_limits<double>::quiet_NaN();  // across rounds
  int rows = 0;
};

// Aggregation over a results CSV; no recomputation of metrics.
std::vector<ReportGroup> cmd_report(const std::string& results_csv);

std::string render_report_text(const std::vector<ReportGroup>& groups);
std::string render_report_json(const std::vector<ReportGroup>& groups);

}  // namespace fedmap
