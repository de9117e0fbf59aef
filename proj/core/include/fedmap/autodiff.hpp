#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "fedmap/arch.hpp"
#include "fedmap/dual.hpp"
#include "fedmap/types.hpp"
#include "fedmap/weights.hpp"

namespace fedmap {

double forward(const ModelWeights& w, std::span<const double> x,
               const DropoutMode& mode);

inline double mse_loss(double pred, double y) {
  double r = pred - y;
  return r * r;
}

// Gradient of the mean MSE over the batch. Per-sample loss is (pred - y)^2,
// so the batch loss matches the MSE definition without extra factors.
GradientVector weight_gradient(const ModelWeights& w,
                               std::span<const Sample> batch,
                               const DropoutMode& mode);

// Per-sample partials of the loss w.r.t. one first-layer bias entry, plus
// their batch mean. The unit defaults to the one with the largest |mean|.
// Always evaluated in dropout inference mode.
struct BiasPartials {
  int unit = 0;
  std::vector<double> per_sample;
  double mean = 0.0;
};

BiasPartials bias_partials(const ModelWeights& w, std::span<const Sample> batch,
                           std::optional<int> unit = std::nullopt);

double cosine_similarity(const GradientVector& a, const GradientVector& b);

// 1 - cos(dummy, truth) + alpha, range [alpha, 2 + alpha].
double match_loss(const GradientVector& dummy_grad,
                  const GradientVector& true_grad, double alpha);

struct MatchGradient {
  double loss = 0.0;
  double cosine = 0.0;
  std::array<double, 2> dx{0.0, 0.0};
  double dy = 0.0;

  double input_norm() const {
    return std::sqrt(dx[0] * dx[0] + dx[1] * dx[1] + dy * dy);
  }
};

// Repeated evaluation of the matching loss and its exact gradient w.r.t. the
// dummy point (x', y') against one fixed true gradient. Keeps its scratch
// buffers so per-iteration cost in the reconstruction loop stays allocation
// free. Dummy gradients are always computed in dropout inference mode.
class MatchOracle {
 public:
  MatchOracle(const ModelWeights& weights, const GradientVector& true_grad,
              double alpha);

  MatchGradient eval(const std::array<double, 2>& x, double y);

  double true_grad_norm() const { return true_norm_; }

 private:
  const ModelWeights& weights_;
  const GradientVector& true_grad_;
  double alpha_;
  double true_norm_;
  std::vector<Dual3> grad_;          // per-sample dummy gradient, dual-valued
  std::vector<std::vector<Dual3>> acts_;
  std::vector<std::vector<Dual3>> pre_;
  std::vector<std::vector<Dual3>> delta_;
  std::vector<LayerLayout> layout_;
};

// One-shot convenience wrapper around MatchOracle.
MatchGradient input_gradient_of_match(const ModelWeights& weights,
                                      const GradientVector& true_grad,
                                      const std::array<double, 2>& x, double y,
                                      double alpha);

ModelWeights sgd_step(const ModelWeights& w, const GradientVector& grad,
                      double eta);

}  // namespace fedmap
