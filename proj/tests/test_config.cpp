#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fedmap/config.hpp"
#include "fedmap/experiment.hpp"

#include "json.hpp"

using namespace fedmap;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("toml subset: sections, scalars, arrays, comments") {
  auto doc = parse_toml(
      "seed = 42  # master seed\n"
      "out_dir = \"results\"\n"
      "\n"
      "[fed]\n"
      "B = \"inf\"\n"
      "E = 5\n"
      "eta = 1e-3\n"
      "cumulative = true\n"
      "[sweep]\n"
      "B = [\"inf\", 20, 5]\n");
  const auto* top = doc.find("");
  REQUIRE(top != nullptr);
  CHECK(top->at(0).key == "seed");
  CHECK(top->at(0).value.as_number() == 42.0);
  CHECK(top->at(1).value.as_string() == "results");

  const auto* fed = doc.find("fed");
  REQUIRE(fed != nullptr);
  CHECK(fed->at(0).value.as_string() == "inf");
  CHECK(fed->at(1).value.as_number() == 5.0);
  CHECK(fed->at(2).value.as_number() == doctest::Approx(1e-3));
  CHECK(fed->at(3).value.as_bool() == true);

  const auto* sweep = doc.find("sweep");
  REQUIRE(sweep != nullptr);
  const auto& arr = sweep->at(0).value.as_array();
  REQUIRE(arr.size() == 3);
  CHECK(arr[0].as_string() == "inf");
  CHECK(arr[2].as_number() == 5.0);
}

TEST_CASE("toml subset: malformed input fails with a line number") {
  CHECK_THROWS_AS(parse_toml("key 42\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("key = \"unterminated\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("[section\nkey = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_toml("key = bareword\n"), ConfigError);
  try {
    parse_toml("a = 1\nb = ???\n");
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("experiment schema: defaults and overrides") {
  auto cfg = parse_experiment_config(parse_toml(
      "seed = 9\n"
      "[data]\n"
      "source = \"synth\"\n"
      "users = 3\n"
      "[model]\n"
      "hidden = [8, 4]\n"
      "activation = \"softplus\"\n"
      "dropout = 0\n"
      "[fed]\n"
      "B = 20\n"
      "E = 5\n"
      "[defense]\n"
      "policy = \"diverse\"\n"
      "eps_km = 0.05\n"
      "[dp]\n"
      "enabled = true\n"
      "epsilon = 10\n"));
  CHECK(cfg.seed == 9);
  CHECK(cfg.synth.n_users == 3);
  CHECK(cfg.arch.layer_widths == std::vector<int>{2, 8, 4, 1});
  CHECK(cfg.fed.minibatch == 20);
  CHECK(cfg.fed.epochs == 5);
  CHECK(cfg.fed.selection.kind == SelectionKind::kDiverse);
  CHECK(cfg.dp_enabled);
  REQUIRE(cfg.fed.dp.has_value());
  CHECK(cfg.fed.dp->epsilon == 10.0);
  CHECK_FALSE(cfg.fed.is_fedsgd());
  CHECK(scheme_name(cfg) == "fedavg+diverse+dp");
}

TEST_CASE("experiment schema: B = inf selects FedSGD") {
  auto cfg = parse_experiment_config(parse_toml("[fed]\nB = \"inf\"\nE = 1\n"));
  CHECK_FALSE(cfg.fed.minibatch.has_value());
  CHECK(cfg.fed.is_fedsgd());
  CHECK(scheme_name(cfg) == "fedsgd");
}

TEST_CASE("experiment schema: unknown keys and sections are errors") {
  CHECK_THROWS_AS(parse_experiment_config(parse_toml("[fed]\nbogus = 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(parse_toml("[nonsense]\nx = 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(parse_toml("[sweep]\nbogus = [1]\n")),
                  ConfigError);
}

TEST_CASE("sweep expansion: cartesian product in listed order") {
  auto cfg = parse_experiment_config(parse_toml(
      "[sweep]\n"
      "B = [\"inf\", 20]\n"
      "E = [1, 5]\n"));
  auto points = expand_sweep(cfg);
  REQUIRE(points.size() == 4);
  CHECK_FALSE(points[0].config.fed.minibatch.has_value());
  CHECK(points[1].config.fed.minibatch == 20);
  CHECK(points[0].config.fed.epochs == 1);
  CHECK(points[3].config.fed.epochs == 5);
  CHECK(points[3].config.fed.minibatch == 20);
  CHECK(points[0].index == 0);
  CHECK(points[3].index == 3);
}

TEST_CASE("sweep expansion: dp_epsilon 0 turns DP off for that point") {
  auto cfg = parse_experiment_config(parse_toml(
      "[dp]\n"
      "enabled = true\n"
      "epsilon = 1\n"
      "[sweep]\n"
      "dp_epsilon = [0, 10]\n"));
  auto points = expand_sweep(cfg);
  REQUIRE(points.size() == 2);
  CHECK_FALSE(points[0].config.fed.dp.has_value());
  REQUIRE(points[1].config.fed.dp.has_value());
  CHECK(points[1].config.fed.dp->epsilon == 10.0);
}

TEST_CASE("config file: boundary forms") {
  auto cfg = parse_experiment_config(parse_toml(
      "[attack]\nboundary = [0, 0, 1000, 2000]\n"));
  CHECK_FALSE(cfg.boundary_auto);
  CHECK(cfg.boundary.e_max == 1000.0);
  auto cfg2 = parse_experiment_config(parse_toml("[attack]\nboundary = \"auto\"\n"));
  CHECK(cfg2.boundary_auto);
}

}  // TEST_SUITE

TEST_SUITE("report") {

TEST_CASE("cmd_report: empty results give empty tables") {
  auto path = temp_file("fedmap_report_empty.csv", std::string(kResultsHeader) + "\n");
  auto groups = cmd_report(path);
  CHECK(groups.empty());
  CHECK(render_report_text(groups).find("scheme") != std::string::npos);
}

TEST_CASE("cmd_report: single row passes through") {
  auto path = temp_file(
      "fedmap_report_one.csv",
      std::string(kResultsHeader) +
          "\nfedsgd,1,inf,1,24,,,,5.5,12.25,0.1,30.5,250.0\n");
  auto groups = cmd_report(path);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].scheme == "fedsgd");
  CHECK(groups[0].final_round == 1);
  CHECK(groups[0].rmse == doctest::Approx(5.5));
  CHECK(groups[0].emd_m == doctest::Approx(12.25));
  CHECK(groups[0].centroid_dist_m == doctest::Approx(30.5));
  CHECK(groups[0].rows == 1);
}

TEST_CASE("cmd_report: grouped aggregation equals a hand recount") {
  auto path = temp_file(
      "fedmap_report_groups.csv",
      std::string(kResultsHeader) +
          "\nfedsgd,1,inf,1,24,,,,6.0,10,0,20,100\n"
          "fedsgd,2,inf,1,24,,,,4.0,11,0,25,120\n"
          "fedavg,1,20,5,24,,,,5.0,14,0.5,40,300\n"
          "fedavg,2,20,5,24,,,,3.0,15,0.25,45,320\n");
  auto groups = cmd_report(path);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].final_round == 2);
  CHECK(groups[0].rmse == doctest::Approx(4.0));
  CHECK(groups[0].mean_rmse == doctest::Approx((6.0 + 4.0) / 2.0));
  CHECK(groups[1].scheme == "fedavg");
  CHECK(groups[1].emd_m == doctest::Approx(15.0));
  CHECK(groups[1].mean_rmse == doctest::Approx(4.0));
  CHECK(groups[1].diverged_frac == doctest::Approx(0.25));

  auto json = nlohmann::json::parse(render_report_json(groups));
  REQUIRE(json.size() == 2);
  CHECK(json[0]["scheme"] == "fedsgd");
  CHECK(json[1]["mean_rmse"] == doctest::Approx(4.0));
}

TEST_CASE("cmd_report: schema mismatch is an error") {
  auto path = temp_file("fedmap_report_bad.csv", "not,the,header\n1,2,3\n");
  CHECK_THROWS_AS(cmd_report(path), DataError);
}

TEST_CASE("cmd_synth: byte-identical output and recount consistency") {
  ExperimentConfig cfg;
  cfg.synth.n_users = 2;
  cfg.synth.weeks = 1;
  cfg.synth.samples_per_hour = 5;
  cfg.synth.commute_samples_per_hour = 2;
  cfg.fed.round_hours = 24.0;

  auto dir = std::filesystem::temp_directory_path() / "fedmap_synth_test";
  std::filesystem::create_directories(dir);
  auto a = (dir / "a.csv").string();
  auto b = (dir / "b.csv").string();
  cmd_synth(cfg, a);
  cmd_synth(cfg, b);

  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());

  auto ds = synth_trajectories(cfg.synth);
  auto stats = summarize(ds, cfg.fed.round_hours);
  std::size_t lines = 0;
  std::string line;
  std::ifstream fc(a);
  std::getline(fc, line);  // header
  while (std::getline(fc, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == stats.total);
  CHECK(stats.total == ds.rows.size());
}

TEST_CASE("cmd_synth: zero users is a config error") {
  ExperimentConfig cfg;
  cfg.synth.n_users = 0;
  CHECK_THROWS_AS(cmd_synth(cfg, "/tmp/fedmap_should_not_exist.csv"), ConfigError);
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("sweep expansion: data knobs flag a dataset rebuild") {
  auto cfg = parse_experiment_config(parse_toml(
      "[sweep]\n"
      "user_similarity = [1.0, 0.0]\n"
      "E = [1, 5]\n"));
  auto points = expand_sweep(cfg);
  REQUIRE(points.size() == 4);
  for (const auto& p : points) CHECK(p.rebuild_data);
  CHECK(points[0].config.synth.user_similarity == 1.0);
  CHECK(points[1].config.synth.user_similarity == 0.0);

  auto plain = expand_sweep(parse_experiment_config(parse_toml("[sweep]\nE = [1, 5]\n")));
  for (const auto& p : plain) CHECK_FALSE(p.rebuild_data);
}

}  // TEST_SUITE
