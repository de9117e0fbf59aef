#include "fedmap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "fedmap/log.hpp"
#include "fedmap/metrics.hpp"
#include "fedmap/rng.hpp"

#include "json.hpp"

namespace fedmap {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::stod(s);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

BuiltData build_data(const ExperimentConfig& cfg) {
  BuiltData out;
  if (cfg.source == "synth") {
    out.ds = synth_trajectories(cfg.synth);
  } else {
    auto loaded = load_csv(cfg.csv_path);
    out.ds = std::move(loaded.dataset);
    if (!loaded.rejected.empty()) {
      log::warn(std::to_string(loaded.rejected.size()) + " rows rejected from " +
                cfg.csv_path);
    }
  }
  if (cfg.test_fraction > 0.0) {
    assign_split(out.ds, cfg.test_fraction, derive_seed(cfg.seed, {0x5411ULL}));
  }
  out.st = Standardizer::fit(out.ds);

  if (cfg.boundary_auto) {
    Boundary b{1e300, 1e300, -1e300, -1e300};
    for (const auto& m : out.ds.rows) {
      b.e_min = std::min(b.e_min, m.easting);
      b.n_min = std::min(b.n_min, m.northing);
      b.e_max = std::max(b.e_max, m.easting);
      b.n_max = std::max(b.n_max, m.northing);
    }
    b.e_min -= cfg.boundary_margin_m;
    b.n_min -= cfg.boundary_margin_m;
    b.e_max += cfg.boundary_margin_m;
    b.n_max += cfg.boundary_margin_m;
    out.boundary = b;
  } else {
    out.boundary = cfg.boundary;
  }
  if (!out.boundary.valid()) throw ConfigError("attack boundary has no area");
  return out;
}

PointOutcome run_sweep_point(const SweepPoint& point, const BuiltData& data,
                             std::uint64_t master_seed) {
  const ExperimentConfig& cfg = point.config;
  PointOutcome out;
  out.point = point;

  // points that swept a generator knob get their own dataset
  BuiltData local;
  const BuiltData& active = point.rebuild_data ? (local = build_data(cfg)) : data;

  RunOptions opts;
  opts.attacks_per_round = cfg.attacks_per_round;
  std::uint64_t seed =
      derive_seed(master_seed, {0x5eedULL, static_cast<std::uint64_t>(point.index)});
  out.result = run_experiment(cfg.fed, cfg.attack, active.boundary, cfg.arch,
                              active.ds, active.st, opts, seed);

  const ExperimentResult& res = out.result;
  // generator-knob sweeps have no column of their own in the pinned schema,
  // so they ride along in the scheme name
  std::string scheme = scheme_name(cfg) + point.data_tag;
  std::string minibatch =
      cfg.fed.minibatch.has_value() ? std::to_string(*cfg.fed.minibatch) : "inf";
  bool uses_eps = cfg.fed.selection.kind != SelectionKind::kFull;
  bool uses_num = cfg.fed.selection.kind == SelectionKind::kFarthest;

  int rounds = static_cast<int>(res.rmse_per_round.size());
  std::uint64_t emd_seed = derive_seed(seed, {0xe4dULL});

  std::vector<Vec2> true_pts;
  std::vector<Vec2> recon_pts;
  std::size_t attack_idx = 0;
  std::size_t true_idx = 0;
  std::vector<double> dists;
  std::vector<double> iters;
  int diverged = 0;
  int attacks_total = 0;

  for (int r = 1; r <= rounds; ++r) {
    while (true_idx < res.true_by_round.size() &&
           res.true_by_round[true_idx].round <= r) {
      const auto& pts = res.true_by_round[true_idx].points;
      true_pts.insert(true_pts.end(), pts.begin(), pts.end());
      ++true_idx;
    }
    while (attack_idx < res.attacks.size() && res.attacks[attack_idx].round <= r) {
      const AttackRecord& a = res.attacks[attack_idx];
      ++attacks_total;
      if (a.result.diverged()) ++diverged;
      if (a.result.status != AttackStatus::kDegenerate) {
        iters.push_back(static_cast<double>(a.result.iterations));
      }
      if (a.result.usable()) {
        // diverged endpoints are discarded from both location metrics
        dists.push_back(a.centroid_dist_m);
        recon_pts.push_back(a.result.x_dlg);
      }
      ++attack_idx;
    }

    ResultRow row;
    row.scheme = scheme;
    row.round = r;
    row.minibatch = minibatch;
    row.epochs = cfg.fed.epochs;
    row.t_hours = cfg.fed.round_hours;
    if (uses_eps) row.eps_km = cfg.fed.selection.eps_km;
    if (uses_num) row.num = cfg.fed.selection.num;
    if (cfg.dp_enabled) row.dp_epsilon = cfg.dp.epsilon;
    row.rmse = res.rmse_per_round[r - 1];
    if (!true_pts.empty() && !recon_pts.empty()) {
      row.emd_m = emd_sliced(true_pts, recon_pts, cfg.emd_projections, emd_seed);
    }
    if (attacks_total > 0) {
      row.diverged_frac =
          static_cast<double>(diverged) / static_cast<double>(attacks_total);
    }
    row.centroid_dist_m = mean_of(dists);
    row.dlg_iters = mean_of(iters);
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

void write_results_csv(const std::string& path,
                       const std::vector<PointOutcome>& outcomes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << kResultsHeader << "\n";
  for (const auto& o : outcomes) {
    for (const auto& r : o.rows) {
      out << r.scheme << ',' << r.round << ',' << r.minibatch << ',' << r.epochs
          << ',' << fmt(r.t_hours, "%g") << ',' << fmt(r.eps_km, "%g") << ','
          << fmt(r.num, "%g") << ',' << fmt(r.dp_epsilon, "%g") << ','
          << fmt(r.rmse) << ',' << fmt(r.emd_m) << ',' << fmt(r.diverged_frac)
          << ',' << fmt(r.centroid_dist_m) << ',' << fmt(r.dlg_iters) << "\n";
    }
  }
}

void write_trace_csv(const std::string& path,
                     const std::vector<PointOutcome>& outcomes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "point,round,user,n_full,n_selected,centroid_e,centroid_n,var_e,var_n,"
         "grad_norm\n";
  for (const auto& o : outcomes) {
    for (const auto& t : o.result.trace) {
      out << o.point.index << ',' << t.round << ',' << t.user << ',' << t.n_full
          << ',' << t.n_selected << ',' << fmt(t.full_centroid.e, "%.3f") << ','
          << fmt(t.full_centroid.n, "%.3f") << ',' << fmt(t.full_coord_var.e, "%.3f")
          << ',' << fmt(t.full_coord_var.n, "%.3f") << ','
          << fmt(t.observed_grad_norm, "%.9g") << "\n";
    }
  }
}

void write_attacks_csv(const std::string& path,
                       const std::vector<PointOutcome>& outcomes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "point,round,attempt,status,x_e,x_n,y_dlg,loss,cosine,iterations,"
         "centroid_dist_m\n";
  for (const auto& o : outcomes) {
    for (const auto& a : o.result.attacks) {
      out << o.point.index << ',' << a.round << ',' << a.attempt << ','
          << to_string(a.result.status) << ',' << fmt(a.result.x_dlg.e, "%.3f")
          << ',' << fmt(a.result.x_dlg.n, "%.3f") << ',' << fmt(a.result.y_dlg, "%.4f")
          << ',' << fmt(a.result.final_loss, "%.9g") << ','
          << fmt(a.result.raw_cosine, "%.9g") << ',' << a.result.iterations << ','
          << fmt(a.centroid_dist_m, "%.3f") << "\n";
    }
  }
}

std::string write_point_geojson(const std::string& out_dir,
                                const PointOutcome& o, const BuiltData& data) {
  char name[64];
  std::snprintf(name, sizeof(name), "points_%03d.geojson", o.point.index);
  std::string path = (std::filesystem::path(out_dir) / name).string();

  std::vector<GeoPoint> pts;
  for (const auto& rp : o.result.true_by_round) {
    for (const auto& p : rp.points) pts.push_back({p, "true", rp.round});
  }
  for (const auto& rp : o.result.selected_by_round) {
    for (const auto& p : rp.points) pts.push_back({p, "selected", rp.round});
  }
  for (const auto& a : o.result.attacks) {
    if (a.result.usable()) {
      pts.push_back({a.result.x_dlg, "reconstructed", a.round});
    }
  }
  write_geojson(path, pts, data.ds.utm_zone, data.ds.utm_north);
  return path;
}

}  // namespace

RunPaths cmd_run(const ExperimentConfig& cfg, const std::string& out_dir,
                 int jobs) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  BuiltData data = build_data(cfg);
  auto points = expand_sweep(cfg);

  std::vector<PointOutcome> outcomes(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));

  auto work = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        outcomes[i] = run_sweep_point(points[i], data, cfg.seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunPaths paths;
  paths.results_csv = (std::filesystem::path(out_dir) / "results.csv").string();
  paths.trace_csv = (std::filesystem::path(out_dir) / "trace.csv").string();
  paths.attacks_csv = (std::filesystem::path(out_dir) / "attacks.csv").string();
  write_results_csv(paths.results_csv, outcomes);
  write_trace_csv(paths.trace_csv, outcomes);
  write_attacks_csv(paths.attacks_csv, outcomes);
  for (const auto& o : outcomes) {
    paths.geojson.push_back(write_point_geojson(out_dir, o, data));
  }
  return paths;
}

std::string cmd_synth(const ExperimentConfig& cfg, const std::string& out_path) {
  Dataset ds = synth_trajectories(cfg.synth);
  std::filesystem::path path = out_path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_csv(ds, path.string());

  auto stats = summarize(ds, cfg.fed.round_hours);
  std::printf("wrote %zu rows to %s\n", ds.rows.size(), path.string().c_str());
  std::printf("batches at T=%g h:\n", cfg.fed.round_hours);
  for (const auto& u : stats.per_user) {
    std::printf("  user %d: %d batches, sizes %zu..%zu (mean %.1f)\n", u.user,
                u.batches, u.min_size, u.max_size, u.mean_size);
  }
  return path.string();
}

// --- verify -------------------------------------------------------------------

namespace {

struct OracleStats {
  int attempted = 0;
  int skipped = 0;
  int hits = 0;
  double worst_dist = 0.0;
  double max_seconds = 0.0;
};

}  // namespace

VerifyReport cmd_verify(const ExperimentConfig& cfg, const VerifyOptions& opts) {
  VerifyReport report;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, detail});
  };
  char buf[256];

  // 1-2: finite-difference gradient checks on a small smooth config
  {
    ArchConfig arch = ArchConfig::make({16, 8}, Activation::kSoftplus);
    double worst = 0.0;
    int checked = 0;
    for (int inst = 0; inst < 10; ++inst) {
      ModelWeights w = build_model(arch, derive_seed(cfg.seed, {0xfdULL,
                                                      static_cast<std::uint64_t>(inst)}));
      Rng rng(derive_seed(cfg.seed, {0xfd2ULL, static_cast<std::uint64_t>(inst)}));
      std::vector<Sample> batch(8);
      for (auto& s : batch) {
        s.x = {rng.next_gaussian(), rng.next_gaussian()};
        s.y = rng.next_gaussian();
      }
      auto grad = weight_gradient(w, batch, DropoutMode::inference());
      while (checked < (inst + 1) * opts.gradient_probes / 10) {
        std::size_t k = rng.next_below(w.size());
        ModelWeights wp = w, wm = w;
        const double h = 1e-5;
        wp.values[k] += h;
        wm.values[k] -= h;
        double lp = 0.0, lm = 0.0;
        for (const auto& s : batch) {
          lp += mse_loss(forward(wp, s.x, DropoutMode::inference()), s.y);
          lm += mse_loss(forward(wm, s.x, DropoutMode::inference()), s.y);
        }
        double fd = (lp - lm) / (2.0 * h * batch.size());
        double denom = std::max(std::fabs(grad.values[k]), std::fabs(fd));
        if (denom < 1e-6) continue;
        worst = std::max(worst, std::fabs(grad.values[k] - fd) / denom);
        ++checked;
      }
    }
    std::snprintf(buf, sizeof(buf), "max rel err %.3e over %d probes (tol 1e-4)",
                  worst, checked);
    add("gradient.weight_fd", worst < 1e-4 && checked >= opts.gradient_probes, buf);
  }
  {
    ArchConfig arch = ArchConfig::make({12, 6}, Activation::kSoftplus);
    ModelWeights w = build_model(arch, derive_seed(cfg.seed, {0xabedULL}));
    Rng rng(derive_seed(cfg.seed, {0xabefULL}));
    std::vector<Sample> batch(6);
    for (auto& s : batch) {
      s.x = {rng.next_gaussian(), rng.next_gaussian()};
      s.y = rng.next_gaussian();
    }
    auto true_grad = weight_gradient(w, batch, DropoutMode::inference());
    MatchOracle oracle(w, true_grad, 0.0);
    auto loss_at = [&](double x0, double x1, double y) {
      Sample s{{x0, x1}, y};
      auto g = weight_gradient(w, std::span<const Sample>{&s, 1},
                               DropoutMode::inference());
      return match_loss(g, true_grad, 0.0);
    };
    double worst = 0.0;
    const double h = 1e-5;
    for (int probe = 0; probe < opts.gradient_probes; ++probe) {
      double x0 = rng.uniform(-2.0, 2.0);
      double x1 = rng.uniform(-2.0, 2.0);
      double y = rng.uniform(-2.0, 2.0);
      auto mg = oracle.eval({x0, x1}, y);
      double fd0 = (loss_at(x0 + h, x1, y) - loss_at(x0 - h, x1, y)) / (2 * h);
      double fd1 = (loss_at(x0, x1 + h, y) - loss_at(x0, x1 - h, y)) / (2 * h);
      double fdy = (loss_at(x0, x1, y + h) - loss_at(x0, x1, y - h)) / (2 * h);
      const double got[3] = {mg.dx[0], mg.dx[1], mg.dy};
      const double want[3] = {fd0, fd1, fdy};
      for (int d = 0; d < 3; ++d) {
        double denom = std::max(std::fabs(got[d]), std::fabs(want[d]));
        if (denom < 1e-7) continue;
        worst = std::max(worst, std::fabs(got[d] - want[d]) / denom);
      }
    }
    std::snprintf(buf, sizeof(buf), "max rel err %.3e over %d points (tol 1e-4)",
                  worst, opts.gradient_probes);
    add("gradient.input_fd", worst < 1e-4, buf);
  }

  // shared synthetic pool for the bound and oracle checks
  BuiltData data = build_data(cfg);
  std::vector<Sample> pool;
  {
    auto part = partition_rounds(data.ds, cfg.fed.round_hours, true);
    auto it = part.by_user.find(cfg.fed.target_user);
    if (it == part.by_user.end()) throw DataError("verify: target user has no data");
    for (const auto& b : it->second) {
      auto samples = to_samples(data.st, b.points);
      pool.insert(pool.end(), samples.begin(), samples.end());
    }
  }

  ArchConfig smooth = cfg.arch;
  for (auto& a : smooth.activations) a = Activation::kSoftplus;
  smooth.dropout_rate = 0.0;

  // 3-5: error-bound identities and dominations on random batches from the pool
  {
    double worst_identity = 0.0;
    int bound1_failures = 0;
    int bound2_failures = 0;
    int skipped = 0;
    int tested = 0;
    Rng rng(derive_seed(cfg.seed, {0x7733ULL}));
    for (int inst = 0; inst < opts.bound_batches; ++inst) {
      ModelWeights w =
          build_model(smooth, derive_seed(cfg.seed, {0x730ULL,
                                                     static_cast<std::uint64_t>(inst)}));
      std::size_t b = 2 + rng.next_below(11);
      std::vector<Sample> batch;
      for (std::size_t i = 0; i < b; ++i) {
        batch.push_back(pool[rng.next_below(pool.size())]);
      }
      try {
        auto t1 = reconstruction_error_and_bound(w, batch);
        std::array<double, 2> x_closed = t1.x_closed;
        if (opts.inject_identity_fault) {
          x_closed[0] = t1.x_bar[0] + 2.0 * (x_closed[0] - t1.x_bar[0]);
          x_closed[1] = t1.x_bar[1] + 2.0 * (x_closed[1] - t1.x_bar[1]);
        }
        double via_closed = std::hypot(x_closed[0] - t1.x_bar[0],
                                       x_closed[1] - t1.x_bar[1]);
        double denom = std::max({t1.exact_error, via_closed, 1e-30});
        worst_identity =
            std::max(worst_identity, std::fabs(t1.exact_error - via_closed) / denom);
        if (t1.upper_bound < t1.exact_error * (1.0 - 1e-12)) ++bound1_failures;

        auto partials = bias_partials(w, batch);
        double lipschitz = lipschitz_pairwise_max(w, batch);
        if (lipschitz > 0.0) {
          double bound2 = lipschitz_error_bound(batch, lipschitz, std::fabs(partials.mean));
          if (bound2 < t1.exact_error * (1.0 - 1e-12)) ++bound2_failures;
        }
        ++tested;
      } catch (const AssumptionViolation&) {
        ++skipped;  // |g-bar| under threshold: assumption 2 gate
      }
    }
    std::snprintf(buf, sizeof(buf),
                  "max rel dev %.3e over %d batches, %d skipped (tol 1e-9)",
                  worst_identity, tested, skipped);
    add("bounds.covariance_identity", worst_identity < 1e-9 && tested > 0, buf);
    std::snprintf(buf, sizeof(buf), "%d violations over %d batches", bound1_failures,
                  tested);
    add("bounds.half_sum", bound1_failures == 0 && tested > 0, buf);
    std::snprintf(buf, sizeof(buf), "%d violations over %d batches (pairwise-max L)",
                  bound2_failures, tested);
    add("bounds.lipschitz", bound2_failures == 0 && tested > 0, buf);
  }

  // 6: closed-form oracle agreement under FedSGD on fresh models. Instances are
  // hour-granularity rounds of the target (the strongest-attack regime),
  // subsampled to mini-batches of at most 32 points.
  {
    std::vector<LocalBatch> rounds;
    {
      auto part1h = partition_rounds(data.ds, 1.0, true);
      auto it = part1h.by_user.find(cfg.fed.target_user);
      if (it == part1h.by_user.end() || it->second.empty()) {
        throw DataError("verify: target user has no hourly rounds");
      }
      rounds = it->second;
    }

    OracleStats stats;
    Rng rng(derive_seed(cfg.seed, {0x0a1cULL}));
    for (int inst = 0; inst < opts.oracle_instances; ++inst) {
      ModelWeights w =
          build_model(smooth, derive_seed(cfg.seed, {0xa1ULL,
                                                     static_cast<std::uint64_t>(inst)}));
      const LocalBatch& round = rounds[rng.next_below(rounds.size())];
      LocalBatch utm_batch;
      utm_batch.round = round.round;
      if (round.size() <= 32) {
        utm_batch.points = round.points;
      } else {
        std::vector<std::size_t> order = epoch_order(
            round.size(), 0,
            derive_seed(cfg.seed, {0x5b5ULL, static_cast<std::uint64_t>(inst)}));
        for (std::size_t i = 0; i < 32; ++i) {
          utm_batch.points.push_back(round.points[order[i]]);
        }
      }
      std::vector<Sample> batch = to_samples(data.st, utm_batch.points);

      Vec2 closed;
      try {
        closed = closed_form_xdlg_utm(w, utm_batch, data.st);
      } catch (const AssumptionViolation&) {
        ++stats.skipped;
        continue;
      }

      auto grad = weight_gradient(w, batch, DropoutMode::inference());
      GradientVector observed(smooth);
      for (std::size_t k = 0; k < grad.size(); ++k) {
        observed.values[k] = -cfg.fed.eta * grad.values[k];
      }

      AttackConfig attack = cfg.attack;
      attack.init = InitStrategy::kFixed;
      attack.fixed_init = {rng.uniform(data.boundary.e_min, data.boundary.e_max),
                           rng.uniform(data.boundary.n_min, data.boundary.n_max)};

      auto t0 = std::chrono::steady_clock::now();
      AttackResult res = dlg_attack(w, observed, attack, data.boundary, data.st,
                                    {}, derive_seed(cfg.seed, {0xa7acULL,
                                                     static_cast<std::uint64_t>(inst)}));
      double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      stats.max_seconds = std::max(stats.max_seconds, seconds);
      ++stats.attempted;
      double dist = distance(res.x_dlg, closed);
      stats.worst_dist = std::max(stats.worst_dist, dist);
      if (dist <= 1.0) ++stats.hits;
    }
    double rate = stats.attempted > 0
                      ? static_cast<double>(stats.hits) / stats.attempted
                      : 0.0;
    std::snprintf(buf, sizeof(buf),
                  "%d/%d within 1.0 m (%.1f%%, need 95%%), %d skipped "
                  "(assumption), worst %.2f m, slowest %.2f s",
                  stats.hits, stats.attempted, 100.0 * rate, stats.skipped,
                  stats.worst_dist, stats.max_seconds);
    add("closed_form.oracle_agreement",
        stats.attempted > 0 && rate >= 0.95 && stats.max_seconds < 5.0, buf);
  }

  // 7: DP noise scale
  {
    DpConfig dp;
    dp.clip_norm = 1.0;
    dp.epsilon = 1.0;
    dp.delta = 1e-5;
    double sigma = dp.sigma();
    std::snprintf(buf, sizeof(buf), "sigma(eps=1, delta=1e-5, C=1) = %.4f "
                  "(expect 4.845)", sigma);
    add("dp.sigma_formula", std::fabs(sigma - 4.8448) < 1e-3, buf);
  }

  // 8: sliced-EMD sanity
  {
    Rng rng(derive_seed(cfg.seed, {0x3414ULL}));
    std::vector<Vec2> p;
    for (int i = 0; i < 50; ++i) {
      p.push_back({rng.uniform(0.0, 2000.0), rng.uniform(0.0, 2000.0)});
    }
    double self = emd_sliced(p, p, 500, derive_seed(cfg.seed, {1}));
    std::snprintf(buf, sizeof(buf), "emd(P,P) = %.3e (tol 1e-9)", self);
    add("emd.identity", self < 1e-9, buf);

    std::vector<Vec2> a{{0.0, 0.0}};
    std::vector<Vec2> bpt{{100.0, 0.0}};
    double est = emd_sliced(a, bpt, 1000, derive_seed(cfg.seed, {2}));
    double expected = 200.0 / 3.14159265358979323846;
    double se = 100.0 * std::sqrt(0.5 - 4.0 / (3.14159265358979 * 3.14159265358979)) /
                std::sqrt(1000.0);
    std::snprintf(buf, sizeof(buf), "100 m pair: %.3f m vs %.3f m (3se = %.3f)",
                  est, expected, 3.0 * se);
    add("emd.point_pair", std::fabs(est - expected) < 3.0 * se, buf);

    std::vector<Vec2> c1, c2;
    std::vector<double> l1, l2;
    for (int i = 0; i < 30; ++i) {
      double v = rng.uniform(0.0, 800.0);
      c1.push_back({v, 0.0});
      l1.push_back(v);
    }
    for (int i = 0; i < 44; ++i) {
      double v = rng.uniform(200.0, 1000.0);
      c2.push_back({v, 0.0});
      l2.push_back(v);
    }
    double sliced = emd_sliced(c1, c2, 2000, derive_seed(cfg.seed, {3}));
    double exact = wasserstein_1d(l1, l2) * 2.0 / 3.14159265358979323846;
    std::snprintf(buf, sizeof(buf), "collinear: %.3f vs (2/pi)*W1 = %.3f", sliced,
                  exact);
    add("emd.collinear", std::fabs(sliced - exact) / exact < 0.05, buf);
  }

  return report;
}

void print_verify_report(const VerifyReport& report) {
  for (const auto& c : report.checks) {
    std::printf("[%s] %-26s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  }
  std::printf("%s\n", report.all_pass() ? "verification passed" : "verification FAILED");
}

// --- report -------------------------------------------------------------------

std::vector<ReportGroup> cmd_report(const std::string& results_csv) {
  std::ifstream in(results_csv);
  if (!in) throw DataError("cannot open " + results_csv);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) {
    throw DataError("results schema mismatch in " + results_csv);
  }

  struct Key {
    std::string scheme, b, e, t, eps, num, dp;
    bool operator==(const Key&) const = default;
  };
  std::vector<Key> keys;
  std::vector<ReportGroup> groups;
  std::vector<std::vector<double>> rmse_series;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 13) cells.push_back("");
    if (cells.size() != 13) throw DataError("bad results row: " + line);

    Key key{cells[0], cells[2], cells[3], cells[4], cells[5], cells[6], cells[7]};
    std::size_t g = 0;
    for (; g < keys.size(); ++g) {
      if (keys[g] == key) break;
    }
    if (g == keys.size()) {
      keys.push_back(key);
      ReportGroup group;
      group.scheme = key.scheme;
      group.minibatch = key.b;
      group.epochs = key.e;
      group.t_hours = key.t;
      group.eps_km = key.eps;
      group.num = key.num;
      group.dp_epsilon = key.dp;
      groups.push_back(group);
      rmse_series.push_back({});
    }

    ReportGroup& group = groups[g];
    int round = static_cast<int>(parse_cell(cells[1]));
    double rmse = parse_cell(cells[8]);
    if (!std::isnan(rmse)) rmse_series[g].push_back(rmse);
    ++group.rows;
    if (round >= group.final_round) {
      group.final_round = round;
      group.rmse = rmse;
      group.emd_m = parse_cell(cells[9]);
      group.diverged_frac = parse_cell(cells[10]);
      group.centroid_dist_m = parse_cell(cells[11]);
      group.dlg_iters = parse_cell(cells[12]);
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].mean_rmse = mean_of(rmse_series[g]);
  }
  return groups;
}

std::string render_report_text(const std::vector<ReportGroup>& groups) {
  std::ostringstream os;
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%-18s %5s %3s %8s %8s %5s %7s | %8s %9s %9s %10s %9s\n",
                "scheme", "B", "E", "T_h", "eps_km", "num", "dp_eps", "rmse",
                "emd_m", "div_frac", "dist_m", "iters");
  os << buf;
  auto cell = [](double v, const char* spec) {
    return std::isnan(v) ? std::string("-") : fmt(v, spec);
  };
  for (const auto& g : groups) {
    std::snprintf(buf, sizeof(buf),
                  "%-18s %5s %3s %8s %8s %5s %7s | %8s %9s %9s %10s %9s\n",
                  g.scheme.c_str(), g.minibatch.c_str(), g.epochs.c_str(),
                  g.t_hours.c_str(), g.eps_km.empty() ? "-" : g.eps_km.c_str(),
                  g.num.empty() ? "-" : g.num.c_str(),
                  g.dp_epsilon.empty() ? "-" : g.dp_epsilon.c_str(),
                  cell(g.rmse, "%.3f").c_str(), cell(g.emd_m, "%.3f").c_str(),
                  cell(g.diverged_frac, "%.3f").c_str(),
                  cell(g.centroid_dist_m, "%.2f").c_str(),
                  cell(g.dlg_iters, "%.1f").c_str());
    os << buf;
  }
  return os.str();
}

std::string render_report_json(const std::vector<ReportGroup>& groups) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto put = [](nlohmann::ordered_json& j, const char* key, double v) {
    if (std::isnan(v)) {
      j[key] = nullptr;
    } else {
      j[key] = v;
    }
  };
  for (const auto& g : groups) {
    nlohmann::ordered_json j;
    j["scheme"] = g.scheme;
    j["B"] = g.minibatch;
    j["E"] = g.epochs;
    j["T_hours"] = g.t_hours;
    j["eps_km"] = g.eps_km;
    j["num"] = g.num;
    j["dp_epsilon"] = g.dp_epsilon;
    j["final_round"] = g.final_round;
    put(j, "rmse", g.rmse);
    put(j, "emd_m", g.emd_m);
    put(j, "diverged_frac", g.diverged_frac);
    put(j, "centroid_dist_m", g.centroid_dist_m);
    put(j, "dlg_iters", g.dlg_iters);
    put(j, "mean_rmse", g.mean_rmse);
    j["rows"] = g.rows;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace fedmap
