#include "fedmap/model.hpp"

#include <cmath>

#include "fedmap/rng.hpp"

namespace fedmap {

ModelWeights build_model(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  ModelWeights w(arch);
  auto layout = make_layout(arch);
  Rng rng(derive_seed(seed, {0x1417ULL}));
  for (const auto& l : layout) {
    double limit = std::sqrt(6.0 / (l.in + l.out));
    for (std::size_t k = 0; k < static_cast<std::size_t>(l.in) * l.out; ++k) {
      w.values[l.weight_offset + k] = rng.uniform(-limit, limit);
    }
    // biases stay zero
  }
  return w;
}

double rmse(const ModelWeights& w, std::span<const Measurement> rows,
            const Standardizer& st) {
  if (!st.fitted) throw DataError("rmse: standardizer not fitted");
  if (rows.empty()) throw DataError("rmse: empty measurement set");
  double acc = 0.0;
  for (const auto& m : rows) {
    auto x = st.transform_xy({m.easting, m.northing});
    double pred = st.invert_label(forward(w, x, DropoutMode::inference()));
    double r = pred - m.rsrp;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(rows.size()));
}

double rmse_test(const ModelWeights& w, const Dataset& ds, const Standardizer& st) {
  auto idx = ds.test_indices();
  std::vector<Measurement> rows;
  if (idx.empty()) {
    return rmse(w, ds.rows, st);
  }
  rows.reserve(idx.size());
  for (std::size_t i : idx) rows.push_back(ds.rows[i]);
  return rmse(w, rows, st);
}

}  // namespace fedmap
