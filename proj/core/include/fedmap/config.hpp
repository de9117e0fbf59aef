#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedmap/attack.hpp"
#include "fedmap/dataio.hpp"
#include "fedmap/fed.hpp"

namespace fedmap {

// Minimal strict TOML subset: [section] headers, key = value with string,
// number, boolean, bare `inf`, or a flat array of those. Unknown keys are
// errors at the schema layer.
struct TomlValue {
  std::variant<std::string, double, bool, std::vector<TomlValue>> data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const {
    return std::holds_alternative<std::vector<TomlValue>>(data);
  }

  const std::string& as_string() const;
  double as_number() const;
  bool as_bool() const;
  const std::vector<TomlValue>& as_array() const;
  std::string repr() const;
};

struct TomlEntry {
  std::string key;
  TomlValue value;
  int line = 0;
};

struct TomlDocument {
  // section "" holds top-level keys; order preserved within a section
  std::vector<std::pair<std::string, std::vector<TomlEntry>>> sections;

  const std::vector<TomlEntry>* find(const std::string& section) const;
};

TomlDocument parse_toml(const std::string& text);
TomlDocument parse_toml_file(const std::string& path);

// --- experiment schema -------------------------------------------------------

struct SweepAxis {
  std::string knob;
  std::vector<TomlValue> values;
};

struct ExperimentConfig {
  // [data]
  std::string source = "synth";  // "synth" | "csv"
  std::string csv_path;
  double test_fraction = 0.2;
  SynthConfig synth;

  // [model]
  ArchConfig arch;

  // [fed] and [defense] and [dp]
  FedConfig fed;
  bool dp_enabled = false;
  DpConfig dp;

  // [attack]
  AttackConfig attack;
  bool boundary_auto = true;
  Boundary boundary;
  double boundary_margin_m = 100.0;

  // [metrics]
  int emd_projections = 1000;
  int baseline_realizations = 5;
  int attacks_per_round = 1;

  // [sweep]
  std::vector<SweepAxis> sweep;

  // top level
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const;
};

ExperimentConfig parse_experiment_config(const TomlDocument& doc);
ExperimentConfig load_experiment_config(const std::string& path);

// One concrete assignment of sweep knobs applied to the base config.
struct SweepPoint {
  int index = 0;
  ExperimentConfig config;
  std::vector<std::pair<std::string, std::string>> assignment;  // knob, shown value
  bool rebuild_data = false;  // set when a data-generator knob was swept
  std::string data_tag;       // "+knob=value" suffix distinguishing such points
};

// Cartesian product over the sweep axes, base config when no axes given.
std::vector<SweepPoint> expand_sweep(const ExperimentConfig& base);

std::string scheme_name(const ExperimentConfig& cfg);

}  // namespace fedmap
