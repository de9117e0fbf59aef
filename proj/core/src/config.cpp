#include "fedmap/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace fedmap {

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ConfigError("expected a string, got " + repr());
  return std::get<std::string>(data);
}

double TomlValue::as_number() const {
  if (!is_number()) throw ConfigError("expected a number, got " + repr());
  return std::get<double>(data);
}

bool TomlValue::as_bool() const {
  if (!is_bool()) throw ConfigError("expected a boolean, got " + repr());
  return std::get<bool>(data);
}

const std::vector<TomlValue>& TomlValue::as_array() const {
  if (!is_array()) throw ConfigError("expected an array, got " + repr());
  return std::get<std::vector<TomlValue>>(data);
}

std::string TomlValue::repr() const {
  if (is_string()) return "\"" + std::get<std::string>(data) + "\"";
  if (is_bool()) return std::get<bool>(data) ? "true" : "false";
  if (is_number()) {
    std::ostringstream os;
    os << std::get<double>(data);
    return os.str();
  }
  std::string out = "[";
  const auto& arr = std::get<std::vector<TomlValue>>(data);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += ", ";
    out += arr[i].repr();
  }
  return out + "]";
}

const std::vector<TomlEntry>* TomlDocument::find(const std::string& section) const {
  for (const auto& [name, entries] : sections) {
    if (name == section) return &entries;
  }
  return nullptr;
}

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t')) take();
  }
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

std::string parse_bare(Cursor& c) {
  std::string out;
  while (!c.done() &&
         (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' ||
          c.peek() == '-' || c.peek() == '.' || c.peek() == '+')) {
    out += c.take();
  }
  return out;
}

TomlValue parse_value(Cursor& c);

TomlValue parse_scalar(Cursor& c) {
  c.skip_ws_inline();
  if (c.done()) fail(c.line, "missing value");
  char ch = c.peek();
  if (ch == '"') {
    c.take();
    std::string s;
    while (!c.done() && c.peek() != '"') {
      if (c.peek() == '\n') fail(c.line, "unterminated string");
      s += c.take();
    }
    if (c.done()) fail(c.line, "unterminated string");
    c.take();
    return TomlValue{s};
  }
  std::string tok = parse_bare(c);
  if (tok.empty()) fail(c.line, std::string("unexpected character '") + ch + "'");
  if (tok == "true") return TomlValue{true};
  if (tok == "false") return TomlValue{false};
  if (tok == "inf") return TomlValue{std::string("inf")};
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used == tok.size()) return TomlValue{v};
  } catch (...) {
  }
  fail(c.line, "bad value '" + tok + "' (strings need quotes)");
}

TomlValue parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (!c.done() && c.peek() == '[') {
    c.take();
    std::vector<TomlValue> arr;
    while (true) {
      c.skip_ws_inline();
      while (!c.done() && c.peek() == '\n') c.take();
      c.skip_ws_inline();
      if (c.done()) fail(c.line, "unterminated array");
      if (c.peek() == ']') {
        c.take();
        break;
      }
      arr.push_back(parse_scalar(c));
      c.skip_ws_inline();
      if (!c.done() && c.peek() == ',') c.take();
    }
    return TomlValue{arr};
  }
  return parse_scalar(c);
}

}  // namespace

TomlDocument parse_toml(const std::string& text) {
  TomlDocument doc;
  doc.sections.push_back({"", {}});
  std::size_t current = 0;

  Cursor c{text};
  while (!c.done()) {
    c.skip_ws_inline();
    if (c.done()) break;
    char ch = c.peek();
    if (ch == '\n') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.done() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      int line = c.line;
      c.take();
      std::string name = parse_bare(c);
      if (name.empty() || c.done() || c.peek() != ']') fail(line, "bad section header");
      c.take();
      c.skip_ws_inline();
      if (!c.done() && c.peek() == '#') {
        while (!c.done() && c.peek() != '\n') c.take();
      }
      doc.sections.push_back({name, {}});
      current = doc.sections.size() - 1;
      continue;
    }
    int line = c.line;
    std::string key = parse_bare(c);
    if (key.empty()) fail(line, std::string("unexpected character '") + ch + "'");
    c.skip_ws_inline();
    if (c.done() || c.peek() != '=') fail(line, "expected '=' after key '" + key + "'");
    c.take();
    TomlValue value = parse_value(c);
    c.skip_ws_inline();
    if (!c.done() && c.peek() == '#') {
      while (!c.done() && c.peek() != '\n') c.take();
    }
    if (!c.done() && c.peek() != '\n') fail(line, "trailing characters after value");
    doc.sections[current].second.push_back({key, std::move(value), line});
  }
  return doc;
}

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

// --- schema -------------------------------------------------------------------

namespace {

using Setter = std::function<void(ExperimentConfig&, const TomlValue&)>;

int to_int(const TomlValue& v) {
  double d = v.as_number();
  if (d != std::floor(d)) throw ConfigError("expected an integer, got " + v.repr());
  return static_cast<int>(d);
}

void set_minibatch(FedConfig& fed, const TomlValue& v) {
  if (v.is_string() && v.as_string() == "inf") {
    fed.minibatch.reset();
  } else {
    fed.minibatch = to_int(v);
  }
}

void set_policy(SelectionPolicy& sel, const TomlValue& v) {
  const std::string& name = v.as_string();
  if (name == "full") {
    sel.kind = SelectionKind::kFull;
  } else if (name == "diverse") {
    sel.kind = SelectionKind::kDiverse;
  } else if (name == "farthest") {
    sel.kind = SelectionKind::kFarthest;
  } else if (name == "random_matched") {
    sel.kind = SelectionKind::kRandomMatched;
  } else {
    throw ConfigError("unknown defense policy: " + name);
  }
}

std::map<std::string, Setter> data_schema() {
  return {
      {"source", [](auto& c, const auto& v) { c.source = v.as_string(); }},
      {"path", [](auto& c, const auto& v) { c.csv_path = v.as_string(); }},
      {"test_fraction", [](auto& c, const auto& v) { c.test_fraction = v.as_number(); }},
      {"users", [](auto& c, const auto& v) { c.synth.n_users = to_int(v); }},
      {"anchors", [](auto& c, const auto& v) { c.synth.anchors_per_user = to_int(v); }},
      {"weeks", [](auto& c, const auto& v) { c.synth.weeks = to_int(v); }},
      {"samples_per_hour",
       [](auto& c, const auto& v) { c.synth.samples_per_hour = to_int(v); }},
      {"commute_samples_per_hour",
       [](auto& c, const auto& v) { c.synth.commute_samples_per_hour = to_int(v); }},
      {"active_hours",
       [](auto& c, const auto& v) {
         c.synth.active_hours.clear();
         for (const auto& h : v.as_array()) c.synth.active_hours.push_back(to_int(h));
       }},
      {"sigma_path_m", [](auto& c, const auto& v) { c.synth.sigma_path_m = v.as_number(); }},
      {"dwell_offset_m",
       [](auto& c, const auto& v) { c.synth.dwell_offset_m = v.as_number(); }},
      {"anchor_spread_m",
       [](auto& c, const auto& v) {
         c.synth.anchor_spread_m.clear();
         for (const auto& s : v.as_array()) {
           c.synth.anchor_spread_m.push_back(s.as_number());
         }
       }},
      {"gps_noise_m", [](auto& c, const auto& v) { c.synth.gps_noise_m = v.as_number(); }},
      {"quantize_deg", [](auto& c, const auto& v) { c.synth.quantize_deg = v.as_number(); }},
      {"p0_dbm", [](auto& c, const auto& v) { c.synth.p0_dbm = v.as_number(); }},
      {"d0_m", [](auto& c, const auto& v) { c.synth.d0_m = v.as_number(); }},
      {"path_loss_exp",
       [](auto& c, const auto& v) { c.synth.path_loss_exp = v.as_number(); }},
      {"sigma_shadow_db",
       [](auto& c, const auto& v) { c.synth.sigma_shadow_db = v.as_number(); }},
      {"base_lat", [](auto& c, const auto& v) { c.synth.base_lat = v.as_number(); }},
      {"base_lon", [](auto& c, const auto& v) { c.synth.base_lon = v.as_number(); }},
      {"area_radius_m",
       [](auto& c, const auto& v) { c.synth.area_radius_m = v.as_number(); }},
      {"tower_east_m", [](auto& c, const auto& v) { c.synth.tower_east_m = v.as_number(); }},
      {"tower_north_m",
       [](auto& c, const auto& v) { c.synth.tower_north_m = v.as_number(); }},
      {"user_similarity",
       [](auto& c, const auto& v) { c.synth.user_similarity = v.as_number(); }},
      {"cell_id", [](auto& c, const auto& v) { c.synth.cell_id = v.as_string(); }},
      {"synth_seed",
       [](auto& c, const auto& v) {
         c.synth.seed = static_cast<std::uint64_t>(v.as_number());
       }},
  };
}

std::map<std::string, Setter> model_schema() {
  return {
      {"hidden",
       [](auto& c, const auto& v) {
         std::vector<int> hidden;
         for (const auto& h : v.as_array()) hidden.push_back(to_int(h));
         std::vector<Activation> acts = c.arch.activations;
         c.arch.layer_widths.clear();
         c.arch.layer_widths.push_back(2);
         for (int h : hidden) c.arch.layer_widths.push_back(h);
         c.arch.layer_widths.push_back(1);
         c.arch.activations.assign(hidden.size(),
                                   acts.empty() ? Activation::kRelu : acts.front());
       }},
      {"activation",
       [](auto& c, const auto& v) {
         if (v.is_array()) {
           c.arch.activations.clear();
           for (const auto& a : v.as_array()) {
             c.arch.activations.push_back(activation_from_string(a.as_string()));
           }
         } else {
           c.arch.activations.assign(c.arch.num_hidden(),
                                     activation_from_string(v.as_string()));
         }
       }},
      {"dropout", [](auto& c, const auto& v) { c.arch.dropout_rate = v.as_number(); }},
  };
}

std::map<std::string, Setter> fed_schema() {
  return {
      {"T_hours", [](auto& c, const auto& v) { c.fed.round_hours = v.as_number(); }},
      {"rounds", [](auto& c, const auto& v) { c.fed.rounds = to_int(v); }},
      {"B", [](auto& c, const auto& v) { set_minibatch(c.fed, v); }},
      {"E", [](auto& c, const auto& v) { c.fed.epochs = to_int(v); }},
      {"C", [](auto& c, const auto& v) { c.fed.client_fraction = v.as_number(); }},
      {"eta", [](auto& c, const auto& v) { c.fed.eta = v.as_number(); }},
      {"cumulative", [](auto& c, const auto& v) { c.fed.cumulative = v.as_bool(); }},
      {"target_user", [](auto& c, const auto& v) { c.fed.target_user = to_int(v); }},
      {"force_target", [](auto& c, const auto& v) { c.fed.force_target = v.as_bool(); }},
  };
}

std::map<std::string, Setter> attack_schema() {
  return {
      {"max_iters", [](auto& c, const auto& v) { c.attack.max_iters = to_int(v); }},
      {"alpha", [](auto& c, const auto& v) { c.attack.alpha = v.as_number(); }},
      {"eta", [](auto& c, const auto& v) { c.attack.attack_eta = v.as_number(); }},
      {"init",
       [](auto& c, const auto& v) {
         c.attack.init = init_strategy_from_string(v.as_string());
       }},
      {"sigma_init_m", [](auto& c, const auto& v) { c.attack.sigma_init_m = v.as_number(); }},
      {"grid_pitch_m", [](auto& c, const auto& v) { c.attack.grid_pitch_m = v.as_number(); }},
      {"fixed_e", [](auto& c, const auto& v) { c.attack.fixed_init.e = v.as_number(); }},
      {"fixed_n", [](auto& c, const auto& v) { c.attack.fixed_init.n = v.as_number(); }},
      {"patience",
       [](auto& c, const auto& v) { c.attack.early_stop_patience = to_int(v); }},
      {"move_tol",
       [](auto& c, const auto& v) { c.attack.early_stop_move_tol = v.as_number(); }},
      {"grad_tol",
       [](auto& c, const auto& v) { c.attack.converge_grad_tol = v.as_number(); }},
      {"label_init",
       [](auto& c, const auto& v) {
         if (v.is_string() && v.as_string() == "mean") {
           c.attack.label_init.reset();
         } else {
           c.attack.label_init = v.as_number();
         }
       }},
      {"eta_decay", [](auto& c, const auto& v) { c.attack.eta_decay = v.as_number(); }},
      {"boundary",
       [](auto& c, const auto& v) {
         if (v.is_string() && v.as_string() == "auto") {
           c.boundary_auto = true;
           return;
         }
         const auto& arr = v.as_array();
         if (arr.size() != 4) throw ConfigError("boundary needs [e_min, n_min, e_max, n_max]");
         c.boundary_auto = false;
         c.boundary = {arr[0].as_number(), arr[1].as_number(), arr[2].as_number(),
                       arr[3].as_number()};
       }},
      {"boundary_margin_m",
       [](auto& c, const auto& v) { c.boundary_margin_m = v.as_number(); }},
  };
}

std::map<std::string, Setter> defense_schema() {
  return {
      {"policy", [](auto& c, const auto& v) { set_policy(c.fed.selection, v); }},
      {"eps_km", [](auto& c, const auto& v) { c.fed.selection.eps_km = v.as_number(); }},
      {"num", [](auto& c, const auto& v) { c.fed.selection.num = to_int(v); }},
      {"min_pts", [](auto& c, const auto& v) { c.fed.selection.min_pts = to_int(v); }},
      {"keep_noise",
       [](auto& c, const auto& v) { c.fed.selection.keep_noise = v.as_bool(); }},
      {"scope",
       [](auto& c, const auto& v) {
         const std::string& s = v.as_string();
         if (s == "target") {
           c.fed.selection.target_only = true;
         } else if (s == "all") {
           c.fed.selection.target_only = false;
         } else {
           throw ConfigError("defense scope must be 'target' or 'all'");
         }
       }},
  };
}

std::map<std::string, Setter> dp_schema() {
  return {
      {"enabled", [](auto& c, const auto& v) { c.dp_enabled = v.as_bool(); }},
      {"clip_norm", [](auto& c, const auto& v) { c.dp.clip_norm = v.as_number(); }},
      {"epsilon", [](auto& c, const auto& v) { c.dp.epsilon = v.as_number(); }},
      {"delta", [](auto& c, const auto& v) { c.dp.delta = v.as_number(); }},
  };
}

std::map<std::string, Setter> metrics_schema() {
  return {
      {"emd_projections",
       [](auto& c, const auto& v) { c.emd_projections = to_int(v); }},
      {"baseline_realizations",
       [](auto& c, const auto& v) { c.baseline_realizations = to_int(v); }},
      {"attacks_per_round",
       [](auto& c, const auto& v) { c.attacks_per_round = to_int(v); }},
  };
}

std::map<std::string, Setter> top_schema() {
  return {
      {"seed",
       [](auto& c, const auto& v) {
         c.seed = static_cast<std::uint64_t>(v.as_number());
       }},
      {"out_dir", [](auto& c, const auto& v) { c.out_dir = v.as_string(); }},
  };
}

void apply_section(ExperimentConfig& cfg, const TomlDocument& doc,
                   const std::string& section,
                   const std::map<std::string, Setter>& schema) {
  const auto* entries = doc.find(section);
  if (entries == nullptr) return;
  for (const auto& e : *entries) {
    auto it = schema.find(e.key);
    if (it == schema.end()) {
      fail(e.line, "unknown key '" + e.key + "' in [" + section + "]");
    }
    try {
      it->second(cfg, e.value);
    } catch (const ConfigError& err) {
      fail(e.line, std::string(err.what()));
    }
  }
}

const std::vector<std::string> kSweepKnobs = {
    "B",   "E",   "T_hours", "eta",        "C",
    "policy", "eps_km", "num", "dp_epsilon", "user_similarity"};

// knobs that change the generated dataset itself
bool is_data_knob(const std::string& knob) { return knob == "user_similarity"; }

void apply_knob(ExperimentConfig& cfg, const std::string& knob,
                const TomlValue& value) {
  if (knob == "B") {
    set_minibatch(cfg.fed, value);
  } else if (knob == "E") {
    cfg.fed.epochs = to_int(value);
  } else if (knob == "T_hours") {
    cfg.fed.round_hours = value.as_number();
  } else if (knob == "eta") {
    cfg.fed.eta = value.as_number();
  } else if (knob == "C") {
    cfg.fed.client_fraction = value.as_number();
  } else if (knob == "policy") {
    set_policy(cfg.fed.selection, value);
  } else if (knob == "eps_km") {
    cfg.fed.selection.eps_km = value.as_number();
  } else if (knob == "num") {
    cfg.fed.selection.num = to_int(value);
  } else if (knob == "user_similarity") {
    cfg.synth.user_similarity = value.as_number();
  } else if (knob == "dp_epsilon") {
    double eps = value.as_number();
    if (eps <= 0.0) {
      cfg.dp_enabled = false;  // 0 means "no DP" so sweeps can include a baseline
    } else {
      cfg.dp_enabled = true;
      cfg.dp.epsilon = eps;
    }
  } else {
    throw ConfigError("unknown sweep knob '" + knob + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (source != "synth" && source != "csv") {
    throw ConfigError("data source must be 'synth' or 'csv'");
  }
  if (source == "csv" && csv_path.empty()) {
    throw ConfigError("csv source needs a path");
  }
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test_fraction must lie in [0, 1)");
  }
  arch.validate();
  fed.validate();
  attack.validate();
  if (dp_enabled) dp.validate();
  if (!boundary_auto && !boundary.valid()) {
    throw ConfigError("explicit boundary must have positive area");
  }
  if (emd_projections < 1) throw ConfigError("emd_projections must be >= 1");
  if (baseline_realizations < 1) throw ConfigError("baseline_realizations >= 1");
  if (attacks_per_round < 1) throw ConfigError("attacks_per_round must be >= 1");
  for (const auto& axis : sweep) {
    if (axis.values.empty()) {
      throw ConfigError("sweep axis '" + axis.knob + "' has no values");
    }
  }
}

ExperimentConfig parse_experiment_config(const TomlDocument& doc) {
  ExperimentConfig cfg;
  const std::vector<std::string> known = {"",        "data", "model",   "fed",
                                          "attack",  "defense", "dp",
                                          "metrics", "sweep"};
  for (const auto& [name, entries] : doc.sections) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown config section [" + name + "]");
    }
    (void)entries;
  }

  apply_section(cfg, doc, "", top_schema());
  apply_section(cfg, doc, "data", data_schema());
  apply_section(cfg, doc, "model", model_schema());
  apply_section(cfg, doc, "fed", fed_schema());
  apply_section(cfg, doc, "attack", attack_schema());
  apply_section(cfg, doc, "defense", defense_schema());
  apply_section(cfg, doc, "dp", dp_schema());
  apply_section(cfg, doc, "metrics", metrics_schema());

  if (const auto* entries = doc.find("sweep")) {
    for (const auto& e : *entries) {
      if (std::find(kSweepKnobs.begin(), kSweepKnobs.end(), e.key) ==
          kSweepKnobs.end()) {
        fail(e.line, "unknown sweep knob '" + e.key + "'");
      }
      SweepAxis axis;
      axis.knob = e.key;
      for (const auto& v : e.value.as_array()) axis.values.push_back(v);
      cfg.sweep.push_back(std::move(axis));
    }
  }

  if (cfg.dp_enabled) cfg.fed.dp = cfg.dp;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(parse_toml_file(path));
}

std::vector<SweepPoint> expand_sweep(const ExperimentConfig& base) {
  std::vector<SweepPoint> points;
  std::vector<std::size_t> idx(base.sweep.size(), 0);
  int counter = 0;
  while (true) {
    SweepPoint point;
    point.index = counter++;
    point.config = base;
    point.config.sweep.clear();
    for (std::size_t a = 0; a < base.sweep.size(); ++a) {
      const auto& axis = base.sweep[a];
      const TomlValue& v = axis.values[idx[a]];
      apply_knob(point.config, axis.knob, v);
      point.assignment.push_back({axis.knob, v.repr()});
      if (is_data_knob(axis.knob)) {
        point.rebuild_data = true;
        point.data_tag += "+" + axis.knob + "=" + v.repr();
      }
    }
    point.config.fed.dp =
        point.config.dp_enabled ? std::optional<DpConfig>(point.config.dp)
                                : std::nullopt;
    point.config.validate();
    points.push_back(std::move(point));

    // odometer increment
    std::size_t a = 0;
    for (; a < idx.size(); ++a) {
      if (++idx[a] < base.sweep[a].values.size()) break;
      idx[a] = 0;
    }
    if (idx.empty() || a == idx.size()) break;
  }
  return points;
}

std::string scheme_name(const ExperimentConfig& cfg) {
  std::string name = cfg.fed.is_fedsgd() ? "fedsgd" : "fedavg";
  switch (cfg.fed.selection.kind) {
    case SelectionKind::kFull: break;
    case SelectionKind::kDiverse: name += "+diverse"; break;
    case SelectionKind::kFarthest: name += "+farthest"; break;
    case SelectionKind::kRandomMatched: name += "+random"; break;
  }
  if (cfg.dp_enabled) name += "+dp";
  return name;
}

}  // namespace fedmap
