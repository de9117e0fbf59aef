#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedmap/model.hpp"
#include "fedmap/rng.hpp"
#include "oracles.hpp"

using namespace fedmap;

namespace {

Measurement row(double e, double n, double rsrp, int user = 0,
                std::int64_t ts = 0) {
  Measurement m;
  m.easting = e;
  m.northing = n;
  m.rsrp = rsrp;
  m.user_id = user;
  m.timestamp = ts;
  return m;
}

Dataset spread_dataset(int n, std::uint64_t seed) {
  Dataset ds;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    ds.rows.push_back(row(1000.0 + 400.0 * rng.next_gaussian(),
                          2000.0 + 300.0 * rng.next_gaussian(),
                          -90.0 + 8.0 * rng.next_gaussian(), 0, i));
  }
  return ds;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("build_model: deterministic given seed") {
  ArchConfig arch = ArchConfig::make({4}, Activation::kRelu);
  auto a = build_model(arch, 123);
  auto b = build_model(arch, 123);
  auto c = build_model(arch, 124);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("build_model: parameter counts") {
  ArchConfig small = ArchConfig::make({4}, Activation::kRelu);
  CHECK(small.param_count() == 17);
  CHECK(build_model(small, 1).size() == 17);

  // 2 -> 224 -> 640 -> 1: (2*224 + 224) + (224*640 + 640) + (640*1 + 1)
  ArchConfig full;
  CHECK(full.param_count() == 145313);
}

TEST_CASE("build_model: weights bounded by the fan-scaled limit, biases zero") {
  ArchConfig arch = ArchConfig::make({4}, Activation::kRelu);
  auto w = build_model(arch, 9);
  auto layout = make_layout(arch);
  double limit0 = std::sqrt(6.0 / (2 + 4));
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(std::fabs(w.values[layout[0].weight_offset + k]) <= limit0);
  }
  for (int h = 0; h < 4; ++h) CHECK(w.first_layer_bias(h) == 0.0);
}

TEST_CASE("standardizer: {0,2} gives mean 1, std 1") {
  Dataset ds;
  ds.rows.push_back(row(0.0, 0.0, 10.0));
  ds.rows.push_back(row(2.0, 2.0, 20.0));
  auto st = Standardizer::fit(ds);
  CHECK(st.mean_e == doctest::Approx(1.0));
  CHECK(st.std_e == doctest::Approx(1.0));
  auto z0 = st.transform_xy({0.0, 0.0});
  auto z1 = st.transform_xy({2.0, 2.0});
  CHECK(z0[0] == doctest::Approx(-1.0));
  CHECK(z1[0] == doctest::Approx(1.0));
}

TEST_CASE("standardizer: train stats give mean 0 / var 1 on train only") {
  Dataset ds = spread_dataset(500, 77);
  assign_split(ds, 0.25, 5);
  auto st = Standardizer::fit(ds);

  double mean = 0.0, var = 0.0;
  auto train = ds.train_indices();
  for (auto i : train) mean += st.to_sample(ds.rows[i]).x[0];
  mean /= static_cast<double>(train.size());
  for (auto i : train) {
    double z = st.to_sample(ds.rows[i]).x[0];
    var += (z - mean) * (z - mean);
  }
  var /= static_cast<double>(train.size());
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(var == doctest::Approx(1.0).epsilon(1e-9));

  // held-out rows transformed with train statistics are generally off-center
  double test_mean = 0.0;
  for (auto i : ds.test_indices()) test_mean += st.to_sample(ds.rows[i]).x[0];
  test_mean /= static_cast<double>(ds.test_indices().size());
  CHECK(test_mean != doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("standardizer: transform then invert is the identity") {
  Dataset ds = spread_dataset(100, 3);
  auto st = Standardizer::fit(ds);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Vec2 p{rng.uniform(0.0, 5000.0), rng.uniform(0.0, 5000.0)};
    Vec2 back = st.invert_xy(st.transform_xy(p));
    CHECK(back.e == doctest::Approx(p.e).epsilon(1e-9));
    CHECK(back.n == doctest::Approx(p.n).epsilon(1e-9));
    double y = rng.uniform(-120.0, -60.0);
    CHECK(st.invert_label(st.transform_label(y)) == doctest::Approx(y).epsilon(1e-9));
  }
}

TEST_CASE("standardizer: constant column is degenerate") {
  Dataset ds;
  ds.rows.push_back(row(5.0, 0.0, 1.0));
  ds.rows.push_back(row(5.0, 1.0, 2.0));
  CHECK_THROWS_AS(Standardizer::fit(ds), DataError);
}

TEST_CASE("rmse: exact linear relation gives zero error") {
  Dataset ds = spread_dataset(200, 21);
  const double a = 0.01, b = -0.02, c = -70.0;
  for (auto& m : ds.rows) m.rsrp = a * m.easting + b * m.northing + c;
  auto st = Standardizer::fit(ds);

  ArchConfig arch;
  arch.layer_widths = {2, 1};
  arch.activations = {};
  arch.dropout_rate = 0.0;
  ModelWeights w(arch);
  w.values[0] = a * st.std_e / st.std_y;
  w.values[1] = b * st.std_n / st.std_y;
  w.values[2] = (a * st.mean_e + b * st.mean_n + c - st.mean_y) / st.std_y;

  CHECK(rmse(w, ds.rows, st) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rmse: constant predictor at label mean scores the label std") {
  Dataset ds;
  ds.rows.push_back(row(0.0, 0.0, 10.0));
  ds.rows.push_back(row(2.0, 1.0, 20.0));
  auto st = Standardizer::fit(ds);
  ArchConfig arch;
  arch.layer_widths = {2, 1};
  arch.activations = {};
  ModelWeights w(arch);  // predicts standardized 0 = label mean
  CHECK(rmse(w, ds.rows, st) == doctest::Approx(st.std_y));
  CHECK(st.std_y == doctest::Approx(5.0));
}

TEST_CASE("rmse: equals a naive two-pass recomputation and ignores order") {
  Dataset ds = spread_dataset(150, 31);
  auto st = Standardizer::fit(ds);
  ArchConfig arch = ArchConfig::make({16, 8}, Activation::kSoftplus);
  ModelWeights w = build_model(arch, 4);

  double got = rmse(w, ds.rows, st);

  double acc = 0.0;
  for (const auto& m : ds.rows) {
    auto x = st.transform_xy({m.easting, m.northing});
    double pred_std = oracles::naive_forward(w, x[0], x[1]);
    double pred = pred_std * st.std_y + st.mean_y;
    acc += (pred - m.rsrp) * (pred - m.rsrp);
  }
  double expected = std::sqrt(acc / static_cast<double>(ds.rows.size()));
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));

  std::reverse(ds.rows.begin(), ds.rows.end());
  CHECK(rmse(w, ds.rows, st) == doctest::Approx(got).epsilon(1e-12));
}

TEST_CASE("rmse: empty set is an error") {
  Dataset ds = spread_dataset(10, 1);
  auto st = Standardizer::fit(ds);
  ModelWeights w(ArchConfig::make({4}, Activation::kRelu));
  std::vector<Measurement> none;
  CHECK_THROWS_AS(rmse(w, none, st), DataError);
}

}  // TEST_SUITE
