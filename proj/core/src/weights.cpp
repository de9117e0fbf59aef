#include "fedmap/weights.hpp"

#include <cmath>
#include <string>

namespace fedmap {

double ModelWeights::first_layer_bias(int h) const {
  auto layout = make_layout(arch);
  const auto& first = layout.front();
  if (h < 0 || h >= first.out) throw ShapeError("first-layer bias index out of range");
  return values[first.bias_offset + static_cast<std::size_t>(h)];
}

std::size_t ModelWeights::first_layer_bias_offset() const {
  return make_layout(arch).front().bias_offset;
}

double GradientVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

namespace {
void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ShapeError("parameter vectors differ in size: " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}
}  // namespace

void check_same_shape(const ModelWeights& w, const GradientVector& g) {
  check_sizes(w.size(), g.size());
}

void check_same_shape(const GradientVector& a, const GradientVector& b) {
  check_sizes(a.size(), b.size());
}

}  // namespace fedmap
