// fedmap: federated signal-map training with location-reconstruction attacks,
// batch-selection defenses and privacy metrics on synthetic or CSV data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "fedmap/config.hpp"
#include "fedmap/experiment.hpp"
#include "fedmap/log.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitRuntime = 4;

fedmap::ExperimentConfig load_config(const std::string& path,
                                     std::uint64_t seed_override,
                                     bool has_seed_override) {
  auto cfg = fedmap::load_experiment_config(path);
  if (has_seed_override) cfg.seed = seed_override;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated signal-map privacy laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int jobs = 1;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "TOML experiment config")->required();
    cmd->add_option("--out", out_override, "output directory/file override");
    cmd->add_option("--seed-override", seed_override, "replace the config seed")
        ->each([&](const std::string&) { has_seed_override = true; });
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  add_common(synth);

  auto* run = app.add_subcommand("run", "run the experiment sweep");
  add_common(run);
  run->add_option("--jobs", jobs, "max concurrent sweep points")
      ->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "run the analytical verification suite");
  add_common(verify);
  int oracle_instances = 50;
  bool inject_fault = false;
  verify->add_option("--oracle-instances", oracle_instances,
                     "reconstruction instances for the oracle-agreement check");
  verify->add_flag("--inject-identity-fault", inject_fault,
                   "deliberately corrupt the closed form (self-test of the check)")
      ->group("");  // hidden

  auto* report = app.add_subcommand("report", "summarize a results.csv");
  std::string results_path;
  std::string report_out;
  report->add_option("results", results_path, "path to results.csv")->required();
  report->add_option("--out", report_out, "also write a JSON summary here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      auto cfg = load_config(config_path, seed_override, has_seed_override);
      std::string out = out_override.empty()
                            ? (std::filesystem::path(cfg.out_dir) / "synth.csv").string()
                            : out_override;
      fedmap::cmd_synth(cfg, out);
      return kExitOk;
    }
    if (run->parsed()) {
      auto cfg = load_config(config_path, seed_override, has_seed_override);
      std::string out = out_override.empty() ? cfg.out_dir : out_override;
      auto paths = fedmap::cmd_run(cfg, out, jobs);
      std::printf("results: %s\n", paths.results_csv.c_str());
      std::printf("trace:   %s\n", paths.trace_csv.c_str());
      std::printf("attacks: %s\n", paths.attacks_csv.c_str());
      for (const auto& g : paths.geojson) std::printf("geojson: %s\n", g.c_str());
      return kExitOk;
    }
    if (verify->parsed()) {
      auto cfg = load_config(config_path, seed_override, has_seed_override);
      fedmap::VerifyOptions opts;
      opts.oracle_instances = oracle_instances;
      opts.inject_identity_fault = inject_fault;
      auto result = fedmap::cmd_verify(cfg, opts);
      fedmap::print_verify_report(result);
      return result.all_pass() ? kExitOk : kExitVerify;
    }
    if (report->parsed()) {
      auto groups = fedmap::cmd_report(results_path);
      std::fputs(fedmap::render_report_text(groups).c_str(), stdout);
      if (!report_out.empty()) {
        std::ofstream out(report_out);
        if (!out) throw fedmap::DataError("cannot write " + report_out);
        out << fedmap::render_report_json(groups);
      }
      return kExitOk;
    }
  } catch (const fedmap::ConfigError& e) {
    fedmap::log::error(e.what());
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fedmap::log::error(e.what());
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
