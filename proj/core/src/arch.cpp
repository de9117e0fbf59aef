#include "fedmap/arch.hpp"

#include <cstddef>

#include "fedmap/weights.hpp"

namespace fedmap {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "softplus") return Activation::kSoftplus;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftplus: return "softplus";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

std::size_t ArchConfig::param_count() const {
  std::size_t count = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_widths.size()); ++l) {
    count += static_cast<std::size_t>(layer_widths[l]) * layer_widths[l + 1];
    count += static_cast<std::size_t>(layer_widths[l + 1]);
  }
  return count;
}

void ArchConfig::validate() const {
  if (layer_widths.size() < 2) throw ConfigError("arch needs at least one layer");
  for (int w : layer_widths) {
    if (w <= 0) throw ConfigError("layer widths must be positive");
  }
  if (input_width() != 2) throw ConfigError("input width must be 2 (lat, lon features)");
  if (output_width() != 1) throw ConfigError("output width must be 1");
  if (static_cast<int>(activations.size()) != num_hidden()) {
    throw ConfigError("need one activation per hidden layer");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
}

ArchConfig ArchConfig::make(const std::vector<int>& hidden, Activation act,
                            double dropout) {
  ArchConfig a;
  a.layer_widths.clear();
  a.layer_widths.push_back(2);
  for (int h : hidden) a.layer_widths.push_back(h);
  a.layer_widths.push_back(1);
  a.activations.assign(hidden.size(), act);
  a.dropout_rate = dropout;
  a.validate();
  return a;
}

std::vector<LayerLayout> make_layout(const ArchConfig& arch) {
  std::vector<LayerLayout> layout;
  std::size_t offset = 0;
  for (int l = 0; l + 1 < static_cast<int>(arch.layer_widths.size()); ++l) {
    LayerLayout entry;
    entry.in = arch.layer_widths[l];
    entry.out = arch.layer_widths[l + 1];
    entry.weight_offset = offset;
    offset += static_cast<std::size_t>(entry.in) * entry.out;
    entry.bias_offset = offset;
    offset += static_cast<std::size_t>(entry.out);
    layout.push_back(entry);
  }
  return layout;
}

}  // namespace fedmap
