#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedmap/arch.hpp"

namespace fedmap {

// Flat parameter layout, per layer: [W (out x in, row-major), b (out)].
struct LayerLayout {
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
  int in = 0;
  int out = 0;
};

std::vector<LayerLayout> make_layout(const ArchConfig& arch);

// Flattened parameter state of the regression DNN. Value semantics; the
// arch travels with the values so shape checks are always possible.
struct ModelWeights {
  ArchConfig arch;
  std::vector<double> values;

  ModelWeights() = default;
  explicit ModelWeights(const ArchConfig& a)
      : arch(a), values(a.param_count(), 0.0) {}

  std::size_t size() const { return values.size(); }

  std::span<const double> layer_weights(const LayerLayout& l) const {
    return {values.data() + l.weight_offset,
            static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out)};
  }
  std::span<const double> layer_bias(const LayerLayout& l) const {
    return {values.data() + l.bias_offset, static_cast<std::size_t>(l.out)};
  }

  // b^1_h, the first-layer bias entries the reconstruction analysis keys on
  double first_layer_bias(int h) const;
  std::size_t first_layer_bias_offset() const;
};

// Same flat shape as the weights it differentiates.
struct GradientVector {
  ArchConfig arch;
  std::vector<double> values;

  GradientVector() = default;
  explicit GradientVector(const ArchConfig& a)
      : arch(a), values(a.param_count(), 0.0) {}

  std::size_t size() const { return values.size(); }
  double norm() const;
};

void check_same_shape(const ModelWeights& w, const GradientVector& g);
void check_same_shape(const GradientVector& a, const GradientVector& b);

}  // namespace fedmap
