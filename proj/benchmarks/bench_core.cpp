#include <benchmark/benchmark.h>

#include <vector>

#include "fedmap/attack.hpp"
#include "fedmap/defenses.hpp"
#include "fedmap/fed.hpp"
#include "fedmap/geo.hpp"
#include "fedmap/metrics.hpp"
#include "fedmap/model.hpp"
#include "fedmap/rng.hpp"

using namespace fedmap;

namespace {

std::vector<Sample> make_batch(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> batch(n);
  for (auto& s : batch) {
    s.x = {rng.next_gaussian(), rng.next_gaussian()};
    s.y = rng.next_gaussian();
  }
  return batch;
}

std::vector<Vec2> make_points(std::size_t n, double spread, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec2> pts(n);
  for (auto& p : pts) {
    p = {spread * rng.next_gaussian(), spread * rng.next_gaussian()};
  }
  return pts;
}

const ArchConfig kReduced = ArchConfig::make({32, 32}, Activation::kSoftplus, 0.0);
const ArchConfig kFull = [] {
  ArchConfig a;  // 2 -> 224 -> 640 -> 1, relu/sigmoid, 5% dropout
  return a;
}();

}  // namespace

static void BM_ForwardReduced(benchmark::State& state) {
  ModelWeights w = build_model(kReduced, 1);
  std::array<double, 2> x{0.3, -0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(w, x, DropoutMode::inference()));
  }
}
BENCHMARK(BM_ForwardReduced);

static void BM_ForwardFullArch(benchmark::State& state) {
  ModelWeights w = build_model(kFull, 1);
  std::array<double, 2> x{0.3, -0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(w, x, DropoutMode::inference()));
  }
}
BENCHMARK(BM_ForwardFullArch);

static void BM_WeightGradient(benchmark::State& state) {
  ModelWeights w = build_model(kReduced, 2);
  auto batch = make_batch(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weight_gradient(w, batch, DropoutMode::inference()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WeightGradient)->Arg(32)->Arg(256)->Arg(2048);

static void BM_MatchOracleEval(benchmark::State& state) {
  ModelWeights w = build_model(kReduced, 4);
  auto batch = make_batch(16, 5);
  auto grad = weight_gradient(w, batch, DropoutMode::inference());
  MatchOracle oracle(w, grad, 0.0);
  double x0 = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(oracle.eval({x0, -0.2}, 0.4));
    x0 += 1e-9;  // defeat caching without changing the workload
  }
}
BENCHMARK(BM_MatchOracleEval);

static void BM_DlgAttack(benchmark::State& state) {
  ModelWeights w = build_model(kReduced, 6);
  auto batch = make_batch(8, 7);
  auto grad = weight_gradient(w, batch, DropoutMode::inference());
  GradientVector observed(kReduced);
  for (std::size_t k = 0; k < grad.size(); ++k) {
    observed.values[k] = -0.001 * grad.values[k];
  }
  Standardizer st;
  st.fitted = true;
  Boundary boundary{-10, -10, 10, 10};
  AttackConfig cfg;
  cfg.max_iters = 20000;
  cfg.sigma_init_m = 1.0;
  InitContext ctx;
  ctx.centroid_hint = Vec2{0.0, 0.0};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        dlg_attack(w, observed, cfg, boundary, st, ctx, ++seed));
  }
}
BENCHMARK(BM_DlgAttack);

static void BM_Dbscan(benchmark::State& state) {
  auto pts = make_points(static_cast<std::size_t>(state.range(0)), 100.0, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dbscan(pts, 25.0, 1));
  }
}
BENCHMARK(BM_Dbscan)->Arg(256)->Arg(2048);

static void BM_DiverseBatch(benchmark::State& state) {
  auto pts = make_points(2048, 100.0, 9);
  LocalBatch batch;
  for (const auto& p : pts) {
    Measurement m;
    m.easting = p.e;
    m.northing = p.n;
    batch.points.push_back(m);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(diverse_batch(batch, 25.0, 1, true));
  }
}
BENCHMARK(BM_DiverseBatch);

static void BM_EmdSliced(benchmark::State& state) {
  auto p = make_points(500, 300.0, 10);
  auto q = make_points(500, 300.0, 11);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        emd_sliced(p, q, static_cast<int>(state.range(0)), ++seed));
  }
}
BENCHMARK(BM_EmdSliced)->Arg(100)->Arg(1000);

static void BM_UtmRoundTrip(benchmark::State& state) {
  double lat = 40.0, lon = -3.7;
  for (auto _ : state) {
    auto p = to_utm(lat, lon);
    auto ll = utm_to_latlon(p);
    benchmark::DoNotOptimize(ll);
    lat += 1e-7;
  }
}
BENCHMARK(BM_UtmRoundTrip);

static void BM_UserUpdateFedAvg(benchmark::State& state) {
  Rng rng(12);
  Dataset ds;
  for (int i = 0; i < 512; ++i) {
    Measurement m;
    m.easting = 1000.0 + 400.0 * rng.next_gaussian();
    m.northing = 2000.0 + 400.0 * rng.next_gaussian();
    m.rsrp = -90.0 + 6.0 * rng.next_gaussian();
    m.timestamp = i;
    ds.rows.push_back(m);
  }
  auto st = Standardizer::fit(ds);
  LocalBatch batch;
  batch.points = ds.rows;
  FedConfig cfg;
  cfg.minibatch = 20;
  cfg.epochs = 5;
  cfg.eta = 0.001;
  ModelWeights start = build_model(kReduced, 13);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        user_update(start, batch, cfg.selection, st, cfg, ++seed));
  }
}
BENCHMARK(BM_UserUpdateFedAvg);

BENCHMARK_MAIN();
