#include "fedmap/fed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fedmap/log.hpp"
#include "fedmap/rng.hpp"

namespace fedmap {

LocalBatch apply_selection(const LocalBatch& batch, const SelectionPolicy& policy,
                           std::uint64_t seed) {
  switch (policy.kind) {
    case SelectionKind::kFull:
      return batch;
    case SelectionKind::kDiverse:
      return diverse_batch(batch, policy.eps_km * 1000.0, policy.min_pts,
                           policy.keep_noise);
    case SelectionKind::kFarthest:
      return farthest_batch(batch, policy.eps_km * 1000.0, policy.num,
                            policy.min_pts);
    case SelectionKind::kRandomMatched: {
      // size-matched baseline: as many points as Diverse Batch keeps,
      // drawn uniformly at random
      LocalBatch diverse = diverse_batch(batch, policy.eps_km * 1000.0,
                                         policy.min_pts, policy.keep_noise);
      Rng rng(derive_seed(seed, {0x4a2dULL}));
      std::vector<std::size_t> order =
          epoch_order(batch.size(), 0, rng.next_u64());
      LocalBatch out;
      out.round = batch.round;
      out.user = batch.user;
      std::vector<std::size_t> idx(order.begin(),
                                   order.begin() + diverse.size());
      std::sort(idx.begin(), idx.end());
      for (std::size_t i : idx) out.points.push_back(batch.points[i]);
      return out;
    }
  }
  return batch;
}

void FedConfig::validate() const {
  if (round_hours <= 0.0) throw ConfigError("fed: T must be positive");
  if (rounds < 1) throw ConfigError("fed: rounds must be >= 1");
  if (minibatch.has_value() && *minibatch < 1) {
    throw ConfigError("fed: B must be >= 1 or unbounded");
  }
  if (epochs < 1) throw ConfigError("fed: E must be >= 1");
  if (client_fraction <= 0.0 || client_fraction > 1.0) {
    throw ConfigError("fed: C must lie in (0, 1]");
  }
  if (eta <= 0.0) throw ConfigError("fed: eta must be positive");
  if (dp.has_value()) dp->validate();
}

const LocalBatch* RoundPartition::find(int user, int round) const {
  auto it = by_user.find(user);
  if (it == by_user.end()) return nullptr;
  for (const auto& b : it->second) {
    if (b.round == round) return &b;
  }
  return nullptr;
}

RoundPartition partition_rounds(const Dataset& ds, double t_hours,
                                bool train_only) {
  if (t_hours <= 0.0) throw ConfigError("partition_rounds: T must be positive");
  RoundPartition part;
  if (ds.rows.empty()) return part;

  std::int64_t origin = std::numeric_limits<std::int64_t>::max();
  for (const auto& m : ds.rows) origin = std::min(origin, m.timestamp);
  part.origin_timestamp = origin;
  const double t_seconds = t_hours * 3600.0;

  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    if (train_only && ds.row_is_test(i)) continue;
    const Measurement& m = ds.rows[i];
    int round = 1 + static_cast<int>(
                        std::floor(static_cast<double>(m.timestamp - origin) /
                                   t_seconds));
    auto& batches = part.by_user[m.user_id];
    if (batches.empty() || batches.back().round != round) {
      LocalBatch b;
      b.round = round;
      b.user = m.user_id;
      batches.push_back(std::move(b));
    }
    batches.back().points.push_back(m);
    part.max_round = std::max(part.max_round, round);
  }
  return part;
}

std::vector<std::size_t> epoch_order(std::size_t n, int epoch, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, {0x05dULL, static_cast<std::uint64_t>(epoch)}));
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::uint64_t dropout_seed(std::uint64_t update_seed, int epoch, int step) {
  return derive_seed(update_seed, {0xd40ULL, static_cast<std::uint64_t>(epoch),
                                   static_cast<std::uint64_t>(step)});
}

UserUpdateResult user_update(const ModelWeights& start, const LocalBatch& batch,
                             const SelectionPolicy& policy, const Standardizer& st,
                             const FedConfig& cfg, std::uint64_t seed) {
  if (batch.empty()) throw DataError("user_update: empty batch");
  UserUpdateResult out;
  out.selected = apply_selection(batch, policy, derive_seed(seed, {0x3e1ULL}));
  if (out.selected.empty()) {
    throw SelectionEmptyError("selection produced an empty batch");
  }

  std::vector<Sample> samples = to_samples(st, out.selected.points);
  const std::size_t n = samples.size();
  const std::size_t b =
      cfg.minibatch.has_value()
          ? std::min<std::size_t>(static_cast<std::size_t>(*cfg.minibatch), n)
          : n;

  ModelWeights w = start;
  std::vector<Sample> mini;
  mini.reserve(b);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = epoch_order(n, epoch, seed);
    int step = 0;
    for (std::size_t pos = 0; pos < n; pos += b, ++step) {
      std::size_t end = std::min(pos + b, n);
      mini.clear();
      for (std::size_t k = pos; k < end; ++k) mini.push_back(samples[order[k]]);
      DropoutMode mode = start.arch.dropout_rate > 0.0
                             ? DropoutMode::train(dropout_seed(seed, epoch, step))
                             : DropoutMode::inference();
      GradientVector grad = weight_gradient(w, mini, mode);
      w = sgd_step(w, grad, cfg.eta);
    }
  }
  out.weights = std::move(w);
  return out;
}

ModelWeights server_round(const ModelWeights& global_weights,
                          std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw DataError("server_round: no updates");
  std::size_t total = 0;
  for (const auto& u : updates) total += u.n;
  if (total == 0) throw DataError("server_round: all updates have zero size");

  ModelWeights out(global_weights.arch);
  for (const auto& u : updates) {
    if (u.weights.size() != out.size()) {
      throw ShapeError("server_round: update shape mismatch");
    }
    double w = static_cast<double>(u.n) / static_cast<double>(total);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
      out.values[k] += w * u.weights.values[k];
    }
  }
  return out;
}

GradientVector observed_gradient(const ModelWeights& w_end,
                                 const ModelWeights& w_start) {
  if (w_end.size() != w_start.size()) {
    throw ShapeError("observed_gradient: shape mismatch");
  }
  GradientVector g(w_end.arch);
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    g.values[k] = w_end.values[k] - w_start.values[k];
  }
  return g;
}

namespace {

std::vector<int> sample_participants(const std::vector<int>& users,
                                     const FedConfig& cfg, int round,
                                     std::uint64_t seed) {
  const int k = static_cast<int>(users.size());
  int m = std::max(1, static_cast<int>(std::lround(cfg.client_fraction * k)));
  m = std::min(m, k);
  std::vector<int> pool = users;
  Rng rng(derive_seed(seed, {0xc11e27ULL, static_cast<std::uint64_t>(round)}));
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  bool has_target = std::find(pool.begin(), pool.end(), cfg.target_user) != pool.end();
  if (cfg.force_target && !has_target &&
      std::find(users.begin(), users.end(), cfg.target_user) != users.end()) {
    pool.back() = cfg.target_user;
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

ExperimentResult run_experiment(const FedConfig& fed, const AttackConfig& attack,
                                const Boundary& boundary, const ArchConfig& arch,
                                const Dataset& ds, const Standardizer& st,
                                const RunOptions& opts, std::uint64_t seed) {
  fed.validate();
  arch.validate();

  RoundPartition part = partition_rounds(ds, fed.round_hours, /*train_only=*/true);
  std::vector<int> users;
  for (const auto& [user, batches] : part.by_user) users.push_back(user);
  if (users.empty()) throw DataError("run_experiment: no train data");

  ExperimentResult result;
  ModelWeights global = build_model(arch, derive_seed(seed, {0x90deULL}));

  // cumulative mode keeps the union of everything seen so far per user
  std::map<int, LocalBatch> cumulative;

  std::optional<Vec2> prev_xdlg;

  for (int t = 1; t <= fed.rounds; ++t) {
    auto participants = sample_participants(users, fed, t, seed);
    std::vector<ClientUpdate> updates;

    for (int user : participants) {
      const LocalBatch* arrived = part.find(user, t);
      LocalBatch work;
      if (fed.cumulative) {
        auto& acc = cumulative[user];
        acc.user = user;
        if (arrived != nullptr) {
          acc.points.insert(acc.points.end(), arrived->points.begin(),
                            arrived->points.end());
        }
        if (acc.points.empty()) continue;  // nothing seen yet
        work = acc;
        work.round = t;
      } else {
        if (arrived == nullptr) continue;  // user skips the round
        work = *arrived;
      }

      bool is_target = user == fed.target_user;
      SelectionPolicy policy = fed.selection;
      if (policy.target_only && !is_target) policy.kind = SelectionKind::kFull;

      UserUpdateResult update;
      try {
        update = user_update(global, work, policy, st, fed,
                             derive_seed(seed, {0x05e4ULL,
                                                static_cast<std::uint64_t>(t),
                                                static_cast<std::uint64_t>(user)}));
      } catch (const SelectionEmptyError&) {
        log::warn("round " + std::to_string(t) + " user " + std::to_string(user) +
                  ": selection empty, round skipped");
        continue;
      }

      GradientVector observed = observed_gradient(update.weights, global);
      if (fed.dp.has_value()) {
        Rng noise_rng(derive_seed(seed, {0xd9ULL, static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(user)}));
        observed = gaussian_mechanism(observed, *fed.dp, noise_rng);
        // transmitted update is the clipped+noised displacement
        for (std::size_t k = 0; k < update.weights.values.size(); ++k) {
          update.weights.values[k] = global.values[k] + observed.values[k];
        }
      }

      RoundUserTrace trace;
      trace.round = t;
      trace.user = user;
      trace.n_full = work.size();
      trace.n_selected = update.selected.size();
      trace.full_centroid = work.centroid();
      trace.full_coord_var = work.coord_variance();
      trace.observed_grad_norm = observed.norm();
      if (opts.record_state) {
        trace.end_weights = update.weights;
        trace.observed_grad = observed;
      }
      result.trace.push_back(std::move(trace));

      if (is_target) {
        result.selected_by_round.push_back({t, update.selected.locations()});
        if (arrived != nullptr) {
          result.true_by_round.push_back({t, arrived->locations()});
        }
        if (opts.run_attacks) {
          for (int attempt = 0; attempt < opts.attacks_per_round; ++attempt) {
            InitContext ctx;
            ctx.centroid_hint = work.centroid();
            ctx.previous_xdlg = prev_xdlg;
            AttackResult ar = dlg_attack(
                global, observed, attack, boundary, st, ctx,
                derive_seed(seed, {0xa77ac4ULL, static_cast<std::uint64_t>(t),
                                   static_cast<std::uint64_t>(attempt)}));
            AttackRecord rec;
            rec.round = t;
            rec.attempt = attempt;
            rec.result = ar;
            rec.true_centroid = work.centroid();
            rec.centroid_dist_m = distance(ar.x_dlg, rec.true_centroid);
            rec.observed_grad_norm = observed.norm();
            if (attempt == 0 && ar.usable()) prev_xdlg = ar.x_dlg;
            result.attacks.push_back(std::move(rec));
          }
        }
      }

      updates.push_back({user, std::move(update.weights), update.selected.size()});
    }

    if (!updates.empty()) {
      global = server_round(global, updates);
    }
    result.rmse_per_round.push_back(rmse_test(global, ds, st));
    if (opts.record_state) result.global_per_round.push_back(global);
  }

  result.final_weights = std::move(global);
  return result;
}

}  // namespace fedmap
