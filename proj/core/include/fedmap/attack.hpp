#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "fedmap/autodiff.hpp"
#include "fedmap/batch.hpp"
#include "fedmap/dataset.hpp"
#include "fedmap/rng.hpp"
#include "fedmap/types.hpp"

namespace fedmap {

enum class InitStrategy { kGridRandom, kCentroidNoise, kPreviousRound, kFixed };

InitStrategy init_strategy_from_string(const std::string& name);
std::string to_string(InitStrategy s);

struct AttackConfig {
  long max_iters = 400000;
  double alpha = 0.0;
  double attack_eta = 0.01;  // descent rate on the dummy, standardized units

  InitStrategy init = InitStrategy::kCentroidNoise;
  double sigma_init_m = 300.0;   // centroid_noise jitter
  double grid_pitch_m = 350.0;   // grid_random cell size
  Vec2 fixed_init{};             // fixed strategy, UTM meters

  int early_stop_patience = 10;
  double early_stop_move_tol = 1e-6;  // standardized units
  double converge_grad_tol = 1e-9;    // stationarity threshold on the input gradient

  // raw RSRP; unset means the attacker's mean-RSRP estimate (standardizer mean)
  std::optional<double> label_init;

  // step shrink factor on a rejected proposal
  double eta_decay = 0.5;

  void validate() const;
};

enum class AttackStatus { kConverged, kEarlyStopped, kDiverged, kDegenerate };

std::string to_string(AttackStatus s);

struct AttackResult {
  Vec2 x_dlg;           // UTM meters
  double y_dlg = 0.0;   // RSRP units
  double final_loss = 0.0;
  double raw_cosine = 0.0;
  long iterations = 0;
  AttackStatus status = AttackStatus::kDegenerate;

  bool diverged() const { return status == AttackStatus::kDiverged; }
  bool usable() const {
    return status == AttackStatus::kConverged ||
           status == AttackStatus::kEarlyStopped;
  }
};

struct InitContext {
  std::optional<Vec2> centroid_hint;   // attacker's rough estimate of x-bar, UTM
  std::optional<Vec2> previous_xdlg;   // reconstruction from the prior round, UTM
};

struct DummyInit {
  Vec2 x_utm;
  double y_rsrp = 0.0;
};

DummyInit init_dummy(const AttackConfig& cfg, const Boundary& boundary,
                     const InitContext& ctx, const Standardizer& st, Rng& rng);

// Gradient descent on the matching loss over the dummy (x', y'), starting
// from the configured initialization. Dummy gradients are replayed at the
// weights the observed update departed from.
AttackResult dlg_attack(const ModelWeights& weights,
                        const GradientVector& observed_grad,
                        const AttackConfig& cfg, const Boundary& boundary,
                        const Standardizer& st, const InitContext& ctx,
                        std::uint64_t seed);

// --- analytical oracles -----------------------------------------------------

inline constexpr double kGBarThreshold = 1e-12;

// g-weighted location average (feature-space coordinates of the samples).
std::array<double, 2> closed_form_xdlg(const ModelWeights& weights,
                                       std::span<const Sample> batch);

// Convenience wrapper mapping a UTM batch through the standardizer and back.
Vec2 closed_form_xdlg_utm(const ModelWeights& weights, const LocalBatch& batch,
                          const Standardizer& st);

struct ReconstructionErrorBound {
  double exact_error = 0.0;  // covariance-form expression
  double upper_bound = 0.0;  // half-sum expression
  std::array<double, 2> x_closed{0.0, 0.0};
  std::array<double, 2> x_bar{0.0, 0.0};
};

ReconstructionErrorBound reconstruction_error_and_bound(const ModelWeights& weights,
                                        std::span<const Sample> batch);

// max over in-batch pairs of ||grad_i - grad_j|| / sqrt(|x_i-x_j|^2 + |y_i-y_j|^2)
double lipschitz_pairwise_max(const ModelWeights& weights,
                              std::span<const Sample> batch);

double lipschitz_error_bound(std::span<const Sample> batch, double lipschitz,
                      double g_bar_abs);

}  // namespace fedmap
