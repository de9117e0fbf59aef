#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fedmap/attack.hpp"
#include "fedmap/batch.hpp"
#include "fedmap/dataset.hpp"
#include "fedmap/defenses.hpp"
#include "fedmap/model.hpp"
#include "fedmap/weights.hpp"

namespace fedmap {

enum class SelectionKind { kFull, kDiverse, kFarthest, kRandomMatched };

struct SelectionPolicy {
  SelectionKind kind = SelectionKind::kFull;
  double eps_km = 0.0;     // DBSCAN radius for diverse/farthest
  int num = 1;             // farthest batch size
  int min_pts = 1;
  bool keep_noise = true;
  bool target_only = true;  // defenses are applied by the target locally
};

LocalBatch apply_selection(const LocalBatch& batch, const SelectionPolicy& policy,
                           std::uint64_t seed);

struct FedConfig {
  double round_hours = 168.0;        // T
  int rounds = 11;                   // R
  std::optional<int> minibatch;      // B; unset = unbounded (whole LocalBatch)
  int epochs = 1;                    // E
  double client_fraction = 1.0;      // C
  double eta = 0.001;
  SelectionPolicy selection;
  std::optional<DpConfig> dp;
  bool cumulative = false;
  int target_user = 0;
  bool force_target = true;

  bool is_fedsgd() const { return !minibatch.has_value() && epochs == 1; }
  void validate() const;
};

// --- round partitioning ------------------------------------------------------

struct RoundPartition {
  std::map<int, std::vector<LocalBatch>> by_user;  // time-increasing per user
  std::int64_t origin_timestamp = 0;
  int max_round = 0;

  const LocalBatch* find(int user, int round) const;
};

// Splits each user's stream into T-hour interval batches, 1-based round
// indices anchored at the dataset's earliest timestamp. Empty intervals
// produce no batch.
RoundPartition partition_rounds(const Dataset& ds, double t_hours,
                                bool train_only = false);

// --- local update ------------------------------------------------------------

// Shuffled sample order for one epoch; exposed so replay oracles can reuse it.
std::vector<std::size_t> epoch_order(std::size_t n, int epoch, std::uint64_t seed);

std::uint64_t dropout_seed(std::uint64_t update_seed, int epoch, int step);

struct UserUpdateResult {
  ModelWeights weights;
  LocalBatch selected;  // post-selection batch actually trained on
};

// Selection hook, then E epochs of mini-batch SGD from the broadcast weights.
// Deterministic given the seed (shuffle + dropout).
UserUpdateResult user_update(const ModelWeights& start, const LocalBatch& batch,
                             const SelectionPolicy& policy, const Standardizer& st,
                             const FedConfig& cfg, std::uint64_t seed);

// --- server side -------------------------------------------------------------

struct ClientUpdate {
  int user = 0;
  ModelWeights weights;
  std::size_t n = 0;  // training data size this round
};

ModelWeights server_round(const ModelWeights& global_weights,
                          std::span<const ClientUpdate> updates);

// The server's attack signal: w_end - w_start (not rescaled by eta).
GradientVector observed_gradient(const ModelWeights& w_end,
                                 const ModelWeights& w_start);

// --- full experiment ---------------------------------------------------------

struct RoundUserTrace {
  int round = 0;
  int user = 0;
  std::size_t n_full = 0;
  std::size_t n_selected = 0;
  Vec2 full_centroid;
  Vec2 full_coord_var;
  double observed_grad_norm = 0.0;
  std::optional<ModelWeights> end_weights;       // kept when record_state
  std::optional<GradientVector> observed_grad;   // kept when record_state
};

struct AttackRecord {
  int round = 0;
  int attempt = 0;
  AttackResult result;
  Vec2 true_centroid;          // centroid of the full (pre-selection) batch
  double centroid_dist_m = 0.0;
  double observed_grad_norm = 0.0;
};

struct RoundPoints {
  int round = 0;
  std::vector<Vec2> points;
};

struct ExperimentResult {
  std::vector<RoundUserTrace> trace;
  std::vector<AttackRecord> attacks;
  std::vector<double> rmse_per_round;        // test RMSE after each aggregation
  std::vector<RoundPoints> selected_by_round;  // target's trained-on points
  std::vector<RoundPoints> true_by_round;      // target's arriving train points
  ModelWeights final_weights;
  std::vector<ModelWeights> global_per_round;  // kept when record_state
};

struct RunOptions {
  int attacks_per_round = 1;
  bool record_state = false;
  bool run_attacks = true;
};

ExperimentResult run_experiment(const FedConfig& fed, const AttackConfig& attack,
                                const Boundary& boundary, const ArchConfig& arch,
                                const Dataset& ds, const Standardizer& st,
                                const RunOptions& opts, std::uint64_t seed);

}  // namespace fedmap
