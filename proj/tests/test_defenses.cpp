#include <doctest.h>

#include <cmath>
#include <set>

#include "fedmap/defenses.hpp"
#include "fedmap/rng.hpp"
#include "oracles.hpp"

using namespace fedmap;

namespace {

LocalBatch batch_of(const std::vector<Vec2>& pts) {
  LocalBatch b;
  for (const auto& p : pts) {
    Measurement m;
    m.easting = p.e;
    m.northing = p.n;
    b.points.push_back(m);
  }
  return b;
}

std::vector<Vec2> random_points(int n, Rng& rng, double spread) {
  std::vector<Vec2> pts(n);
  for (auto& p : pts) {
    p = {spread * rng.next_gaussian(), spread * rng.next_gaussian()};
  }
  return pts;
}

}  // namespace

TEST_SUITE("defenses") {

TEST_CASE("dbscan: two tight pairs form two clusters") {
  std::vector<Vec2> pts{{0, 0}, {0, 0.1}, {5, 5}, {5, 5.1}};
  auto out = dbscan(pts, 0.5, 2);
  REQUIRE(out.clusters.size() == 2);
  CHECK(out.clusters[0].size() == 2);
  CHECK(out.clusters[1].size() == 2);
  CHECK(out.labels[0] == out.labels[1]);
  CHECK(out.labels[2] == out.labels[3]);
  CHECK(out.labels[0] != out.labels[2]);
  CHECK(out.noise_count() == 0);
}

TEST_CASE("dbscan: identical points collapse to one cluster") {
  std::vector<Vec2> pts(6, Vec2{3.0, 4.0});
  auto out = dbscan(pts, 0.1, 3);
  CHECK(out.clusters.size() == 1);
  CHECK(out.clusters[0].size() == 6);
}

TEST_CASE("dbscan: eps below every pairwise distance leaves only noise") {
  std::vector<Vec2> pts{{0, 0}, {10, 0}, {0, 10}, {7, 7}};
  auto out = dbscan(pts, 1.0, 2);
  CHECK(out.clusters.empty());
  CHECK(out.noise_count() == 4);
}

TEST_CASE("dbscan: matches the brute-force reference on random instances") {
  Rng rng(404);
  for (int inst = 0; inst < 60; ++inst) {
    int n = 4 + static_cast<int>(rng.next_below(60));
    auto pts = random_points(n, rng, 5.0);
    double eps = 0.5 + 4.0 * rng.next_double();
    int min_pts = 1 + static_cast<int>(rng.next_below(5));
    auto out = dbscan(pts, eps, min_pts);
    CHECK(oracles::dbscan_reference_check(pts, eps, min_pts, out.labels));
  }
}

TEST_CASE("diverse_batch: one tight cluster reduces to its medoid") {
  auto b = batch_of({{0, 0}, {0.2, 0}, {-0.2, 0}, {0, 0.2}});
  auto out = diverse_batch(b, 1.0, 1);
  REQUIRE(out.size() == 1);
  // (0,0) is nearest the centroid (0, 0.05)
  CHECK(out.points[0].easting == 0.0);
  CHECK(out.points[0].northing == 0.0);
}

TEST_CASE("diverse_batch: two far clusters plus a noise point keep 3 points") {
  auto b = batch_of({{0, 0}, {0.001, 0}, {5000, 0}, {5000.001, 0}, {2500, 2500}});
  auto out = diverse_batch(b, 0.01, /*min_pts=*/2, true);
  CHECK(out.size() == 3);

  auto dropped = diverse_batch(b, 0.01, 2, false);
  CHECK(dropped.size() == 2);
}

TEST_CASE("diverse_batch: selection is a subset and deterministic") {
  Rng rng(7);
  auto pts = random_points(64, rng, 100.0);
  auto b = batch_of(pts);
  auto out1 = diverse_batch(b, 50.0, 1);
  auto out2 = diverse_batch(b, 50.0, 1);
  REQUIRE(out1.size() == out2.size());
  for (std::size_t i = 0; i < out1.size(); ++i) {
    CHECK(out1.points[i].easting == out2.points[i].easting);
  }
  CHECK(out1.size() <= b.size());
}

TEST_CASE("farthest_batch: picks the cluster farthest from the batch centroid") {
  // cluster A: 3 points around (0,0); cluster B: 2 points around (10,0)
  auto b = batch_of({{-1, 0}, {0, 0}, {1, 0}, {10, -1}, {10, 1}});
  CHECK(b.centroid().e == doctest::Approx(4.0));
  auto out = farthest_batch(b, 3.0, 2, 2);
  REQUIRE(out.size() == 2);
  for (const auto& m : out.points) CHECK(m.easting == doctest::Approx(10.0));
}

TEST_CASE("farthest_batch: num covering the batch returns every point") {
  auto b = batch_of({{0, 0}, {1, 0}, {10, 0}, {11, 0}});
  auto out = farthest_batch(b, 2.0, 4);
  CHECK(out.size() == 4);
  auto out_over = farthest_batch(b, 2.0, 9);
  CHECK(out_over.size() == 4);
}

TEST_CASE("farthest_batch: num=1 selects from the argmax-distance cluster") {
  Rng rng(12);
  for (int inst = 0; inst < 30; ++inst) {
    auto pts = random_points(24, rng, 50.0);
    auto b = batch_of(pts);
    double eps = 20.0;
    auto out = farthest_batch(b, eps, 1);
    REQUIRE(out.size() == 1);
    Vec2 sel{out.points[0].easting, out.points[0].northing};

    auto clusters = dbscan(pts, eps, 1);
    Vec2 centroid = b.centroid();
    double best = -1.0;
    for (const auto& c : clusters.centroids) best = std::max(best, distance(c, centroid));
    // the selected point's own cluster centroid achieves the max distance
    int sel_idx = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].e == sel.e && pts[i].n == sel.n) sel_idx = static_cast<int>(i);
    }
    REQUIRE(sel_idx >= 0);
    int label = clusters.labels[sel_idx];
    REQUIRE(label >= 0);
    CHECK(distance(clusters.centroids[label], centroid) == doctest::Approx(best));
  }
}

TEST_CASE("clip_gradient: norm rule") {
  ArchConfig arch = ArchConfig::make({4}, Activation::kRelu);
  GradientVector g(arch);

  SUBCASE("short vectors pass through") {
    g.values[0] = 0.3;
    g.values[1] = 0.4;  // norm 0.5
    auto out = clip_gradient(g, 1.0);
    CHECK(out.values == g.values);
  }
  SUBCASE("long vectors scale onto the ball") {
    for (auto& v : g.values) v = 1.0;
    double norm = g.norm();
    CHECK(norm > 1.0);
    auto out = clip_gradient(g, 1.0);
    CHECK(out.norm() == doctest::Approx(1.0));
    CHECK(out.values[0] == doctest::Approx(1.0 / norm));
  }
  SUBCASE("zero stays zero") {
    auto out = clip_gradient(g, 1.0);
    CHECK(out.norm() == 0.0);
  }
  SUBCASE("idempotent and bounded on random vectors") {
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
      GradientVector r(arch);
      for (auto& v : r.values) v = 3.0 * rng.next_gaussian();
      auto once = clip_gradient(r, 1.0);
      auto twice = clip_gradient(once, 1.0);
      CHECK(once.norm() <= 1.0 + 1e-12);
      CHECK(once.values == twice.values);
    }
  }
}

TEST_CASE("gaussian_mechanism: sigma formula") {
  DpConfig dp;
  dp.clip_norm = 1.0;
  dp.epsilon = 1.0;
  dp.delta = 1e-5;
  CHECK(dp.sigma() == doctest::Approx(4.8448).epsilon(1e-4));

  DpConfig dp100 = dp;
  dp100.epsilon = 100.0;
  CHECK(dp100.sigma() == doctest::Approx(dp.sigma() / 100.0).epsilon(1e-12));
}

TEST_CASE("gaussian_mechanism: deterministic given the rng seed") {
  ArchConfig arch = ArchConfig::make({8}, Activation::kRelu);
  GradientVector g(arch);
  for (std::size_t k = 0; k < g.size(); ++k) g.values[k] = 0.01 * k;
  DpConfig dp;
  Rng r1(99), r2(99), r3(100);
  auto a = gaussian_mechanism(g, dp, r1);
  auto b = gaussian_mechanism(g, dp, r2);
  auto c = gaussian_mechanism(g, dp, r3);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("gaussian_mechanism: empirical noise std matches sigma within 2%") {
  ArchConfig arch;
  arch.layer_widths = {2, 25000, 1};
  arch.activations = {Activation::kRelu};
  GradientVector zero(arch);
  REQUIRE(zero.size() >= 100000);
  DpConfig dp;
  dp.epsilon = 2.0;
  Rng rng(314);
  auto noised = gaussian_mechanism(zero, dp, rng);
  double mean = 0.0;
  for (double v : noised.values) mean += v;
  mean /= static_cast<double>(noised.size());
  double var = 0.0;
  for (double v : noised.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(noised.size());
  CHECK(std::sqrt(var) == doctest::Approx(dp.sigma()).epsilon(0.02));
}

}  // TEST_SUITE
