#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedmap/types.hpp"

namespace fedmap {

enum class Activation { kRelu, kSigmoid, kSoftplus, kIdentity };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

// Dense feed-forward regression network: 2 location features in, 1 RSRP
// prediction out. Hidden activations are per-layer; dropout sits after each
// hidden activation.
struct ArchConfig {
  std::vector<int> layer_widths{2, 224, 640, 1};
  std::vector<Activation> activations{Activation::kRelu, Activation::kSigmoid};
  double dropout_rate = 0.05;

  int input_width() const { return layer_widths.front(); }
  int output_width() const { return layer_widths.back(); }
  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
  int num_hidden() const { return num_layers() - 1; }

  std::size_t param_count() const;
  void validate() const;  // throws ConfigError on violated invariants

  static ArchConfig make(const std::vector<int>& hidden, Activation act,
                         double dropout = 0.0);
};

// Dropout is inverted (kept units scaled by 1/(1-p)) so inference is a plain
// forward pass. Train masks are a pure function of (seed, sample_index).
struct DropoutMode {
  enum class Kind { kTrain, kInference } kind = Kind::kInference;
  std::uint64_t seed = 0;
  std::uint64_t sample_offset = 0;  // distinguishes samples within a batch

  static DropoutMode inference() { return {}; }
  static DropoutMode train(std::uint64_t seed) {
    return {Kind::kTrain, seed, 0};
  }
  bool active() const { return kind == Kind::kTrain; }
};

}  // namespace fedmap
