#pragma once

#include <cstdint>
#include <span>

#include "fedmap/autodiff.hpp"
#include "fedmap/dataset.hpp"
#include "fedmap/weights.hpp"

namespace fedmap {

// Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases.
// Deterministic for a given seed.
ModelWeights build_model(const ArchConfig& arch, std::uint64_t seed);

// RMSE in original RSRP units over the given rows.
double rmse(const ModelWeights& w, std::span<const Measurement> rows,
            const Standardizer& st);

// RMSE over the dataset's test split (all rows when no split is assigned).
double rmse_test(const ModelWeights& w, const Dataset& ds, const Standardizer& st);

}  // namespace fedmap
