#include "fedmap/autodiff.hpp"

#include <cmath>
#include <cstdint>

#include "fedmap/rng.hpp"

namespace fedmap {

namespace {

constexpr double kZeroNorm = 1e-150;

template <class T>
T sigmoid_t(const T& z) {
  using std::exp;
  return T(1.0) / (T(1.0) + exp(-z));
}

template <class T>
T apply_activation(Activation a, const T& z) {
  switch (a) {
    case Activation::kRelu: return value_of(z) > 0.0 ? z : T(0.0);
    case Activation::kSigmoid: return sigmoid_t(z);
    case Activation::kSoftplus: return log1p_exp(z);
    case Activation::kIdentity: return z;
  }
  return T(0.0);
}

// derivative of the activation at pre-activation z, given act = act(z)
template <class T>
T activation_grad(Activation a, const T& z, const T& act) {
  switch (a) {
    case Activation::kRelu: return value_of(z) > 0.0 ? T(1.0) : T(0.0);
    case Activation::kSigmoid: return act * (T(1.0) - act);
    case Activation::kSoftplus: return sigmoid_t(z);
    case Activation::kIdentity: return T(1.0);
  }
  return T(0.0);
}

template <class T>
struct Buffers {
  std::vector<std::vector<T>> acts;   // acts[0] = input, acts[l] = layer l output
  std::vector<std::vector<T>> pre;    // pre[l] = layer l pre-activation
  std::vector<std::vector<T>> delta;  // dloss/dpre per layer
  std::vector<std::vector<double>> mask;  // dropout scale per hidden layer

  void resize(const ArchConfig& arch) {
    int layers = arch.num_layers();
    acts.resize(layers + 1);
    pre.resize(layers + 1);
    delta.resize(layers + 1);
    mask.resize(layers + 1);
    acts[0].resize(arch.layer_widths[0]);
    for (int l = 1; l <= layers; ++l) {
      acts[l].resize(arch.layer_widths[l]);
      pre[l].resize(arch.layer_widths[l]);
      delta[l].resize(arch.layer_widths[l]);
      if (l < layers) mask[l].resize(arch.layer_widths[l]);
    }
  }
};

void fill_dropout_mask(std::vector<double>& mask, double p, std::uint64_t seed,
                       std::uint64_t sample, int layer) {
  Rng rng(derive_seed(seed, {sample, static_cast<std::uint64_t>(layer)}));
  double keep_scale = 1.0 / (1.0 - p);
  for (double& m : mask) m = rng.next_double() >= p ? keep_scale : 0.0;
}

// Forward pass; fills ws.acts / ws.pre (and masks when training).
template <class T>
T forward_impl(const ModelWeights& w, const std::vector<LayerLayout>& layout,
               const DropoutMode& mode, std::uint64_t sample, Buffers<T>& ws) {
  int layers = static_cast<int>(layout.size());
  bool drop = mode.active() && w.arch.dropout_rate > 0.0;
  for (int l = 1; l <= layers; ++l) {
    const LayerLayout& ll = layout[l - 1];
    const double* wm = w.values.data() + ll.weight_offset;
    const double* bias = w.values.data() + ll.bias_offset;
    const auto& in = ws.acts[l - 1];
    bool hidden = l < layers;
    if (hidden && drop) {
      fill_dropout_mask(ws.mask[l], w.arch.dropout_rate, mode.seed,
                        mode.sample_offset + sample, l);
    }
    for (int r = 0; r < ll.out; ++r) {
      T z(bias[r]);
      const double* row = wm + static_cast<std::size_t>(r) * ll.in;
      for (int c = 0; c < ll.in; ++c) z += row[c] * in[c];
      ws.pre[l][r] = z;
      T a = hidden ? apply_activation(w.arch.activations[l - 1], z) : z;
      if (hidden && drop) a = a * ws.mask[l][r];
      ws.acts[l][r] = a;
    }
  }
  return ws.acts[layers][0];
}

// Per-sample squared-error backprop. Accumulates scale * dloss/dw into
// grad_accum (skipped when empty) and leaves delta[1] in the buffers for
// callers that read the first-layer bias partials.
template <class T>
T per_sample_backprop(const ModelWeights& w,
                      const std::vector<LayerLayout>& layout,
                      const std::array<T, 2>& x, const T& y,
                      const DropoutMode& mode, std::uint64_t sample,
                      std::span<T> grad_accum, double scale, Buffers<T>& ws) {
  ws.acts[0][0] = x[0];
  ws.acts[0][1] = x[1];
  T pred = forward_impl(w, layout, mode, sample, ws);

  int layers = static_cast<int>(layout.size());
  bool drop = mode.active() && w.arch.dropout_rate > 0.0;
  ws.delta[layers][0] = (pred - y) * 2.0;

  for (int l = layers; l >= 1; --l) {
    const LayerLayout& ll = layout[l - 1];
    const double* wm = w.values.data() + ll.weight_offset;
    if (!grad_accum.empty()) {
      T* gw = grad_accum.data() + ll.weight_offset;
      T* gb = grad_accum.data() + ll.bias_offset;
      for (int r = 0; r < ll.out; ++r) {
        T d = ws.delta[l][r] * scale;
        T* grow = gw + static_cast<std::size_t>(r) * ll.in;
        for (int c = 0; c < ll.in; ++c) grow[c] += d * ws.acts[l - 1][c];
        gb[r] += d;
      }
    }
    if (l == 1) break;
    Activation act = w.arch.activations[l - 2];
    for (int c = 0; c < ll.in; ++c) {
      T back(0.0);
      for (int r = 0; r < ll.out; ++r) {
        back += wm[static_cast<std::size_t>(r) * ll.in + c] * ws.delta[l][r];
      }
      if (drop) back = back * ws.mask[l - 1][c];
      ws.delta[l - 1][c] =
          back * activation_grad(act, ws.pre[l - 1][c], ws.acts[l - 1][c]);
    }
  }
  return pred;
}

}  // namespace

double forward(const ModelWeights& w, std::span<const double> x,
               const DropoutMode& mode) {
  if (static_cast<int>(x.size()) != w.arch.input_width()) {
    throw ShapeError("forward: input has wrong width");
  }
  auto layout = make_layout(w.arch);
  Buffers<double> ws;
  ws.resize(w.arch);
  ws.acts[0][0] = x[0];
  ws.acts[0][1] = x[1];
  return forward_impl(w, layout, mode, 0, ws);
}

GradientVector weight_gradient(const ModelWeights& w,
                               std::span<const Sample> batch,
                               const DropoutMode& mode) {
  if (batch.empty()) throw DataError("weight_gradient: empty batch");
  auto layout = make_layout(w.arch);
  GradientVector grad(w.arch);
  Buffers<double> ws;
  ws.resize(w.arch);
  double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    per_sample_backprop<double>(w, layout, batch[i].x, batch[i].y, mode, i,
                                grad.values, scale, ws);
  }
  return grad;
}

BiasPartials bias_partials(const ModelWeights& w, std::span<const Sample> batch,
                           std::optional<int> unit) {
  if (batch.empty()) throw DataError("bias_partials: empty batch");
  auto layout = make_layout(w.arch);
  const int width = layout.front().out;
  Buffers<double> ws;
  ws.resize(w.arch);
  DropoutMode mode = DropoutMode::inference();

  std::vector<std::vector<double>> rows(batch.size());
  std::vector<double> mean(width, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    per_sample_backprop<double>(w, layout, batch[i].x, batch[i].y, mode, i,
                                std::span<double>{}, 1.0, ws);
    rows[i] = ws.delta[1];
    for (int h = 0; h < width; ++h) mean[h] += rows[i][h];
  }
  for (int h = 0; h < width; ++h) mean[h] /= static_cast<double>(batch.size());

  BiasPartials out;
  if (unit.has_value()) {
    if (*unit < 0 || *unit >= width) throw ShapeError("bias unit out of range");
    out.unit = *unit;
  } else {
    int best = 0;
    for (int h = 1; h < width; ++h) {
      if (std::fabs(mean[h]) > std::fabs(mean[best])) best = h;
    }
    out.unit = best;
  }
  out.mean = mean[out.unit];
  out.per_sample.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.per_sample[i] = rows[i][out.unit];
  }
  return out;
}

double cosine_similarity(const GradientVector& a, const GradientVector& b) {
  check_same_shape(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    dot += a.values[k] * b.values[k];
    na += a.values[k] * a.values[k];
    nb += b.values[k] * b.values[k];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kZeroNorm || nb < kZeroNorm) {
    throw DegenerateGradientError("cosine of zero-norm gradient");
  }
  return dot / (na * nb);
}

double match_loss(const GradientVector& dummy_grad,
                  const GradientVector& true_grad, double alpha) {
  return 1.0 - cosine_similarity(dummy_grad, true_grad) + alpha;
}

MatchOracle::MatchOracle(const ModelWeights& weights,
                         const GradientVector& true_grad, double alpha)
    : weights_(weights),
      true_grad_(true_grad),
      alpha_(alpha),
      layout_(make_layout(weights.arch)) {
  check_same_shape(weights, true_grad);
  true_norm_ = true_grad.norm();
  if (true_norm_ < kZeroNorm) {
    throw DegenerateGradientError("true gradient has zero norm");
  }
  grad_.resize(weights.size());
  Buffers<Dual3> ws;
  ws.resize(weights.arch);
  acts_ = std::move(ws.acts);
  pre_ = std::move(ws.pre);
  delta_ = std::move(ws.delta);
}

MatchGradient MatchOracle::eval(const std::array<double, 2>& x, double y) {
  std::array<Dual3, 2> xd{Dual3(x[0], {1.0, 0.0, 0.0}), Dual3(x[1], {0.0, 1.0, 0.0})};
  Dual3 yd(y, {0.0, 0.0, 1.0});

  std::fill(grad_.begin(), grad_.end(), Dual3(0.0));
  Buffers<Dual3> ws;
  ws.acts = std::move(acts_);
  ws.pre = std::move(pre_);
  ws.delta = std::move(delta_);
  per_sample_backprop<Dual3>(weights_, layout_, xd, yd,
                             DropoutMode::inference(), 0, grad_, 1.0, ws);
  acts_ = std::move(ws.acts);
  pre_ = std::move(ws.pre);
  delta_ = std::move(ws.delta);

  Dual3 dot(0.0);
  Dual3 norm_sq(0.0);
  for (std::size_t k = 0; k < grad_.size(); ++k) {
    dot += grad_[k] * true_grad_.values[k];
    norm_sq += grad_[k] * grad_[k];
  }
  if (norm_sq.v < kZeroNorm * kZeroNorm) {
    throw DegenerateGradientError("dummy gradient has zero norm");
  }
  Dual3 cosine = dot / (sqrt(norm_sq) * true_norm_);
  Dual3 loss = Dual3(1.0 + alpha_) - cosine;

  MatchGradient out;
  out.loss = loss.v;
  out.cosine = cosine.v;
  out.dx = {loss.d[0], loss.d[1]};
  out.dy = loss.d[2];
  return out;
}

MatchGradient input_gradient_of_match(const ModelWeights& weights,
                                      const GradientVector& true_grad,
                                      const std::array<double, 2>& x, double y,
                                      double alpha) {
  MatchOracle oracle(weights, true_grad, alpha);
  return oracle.eval(x, y);
}

ModelWeights sgd_step(const ModelWeights& w, const GradientVector& grad,
                      double eta) {
  check_same_shape(w, grad);
  ModelWeights out = w;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] -= eta * grad.values[k];
  }
  return out;
}

}  // namespace fedmap
