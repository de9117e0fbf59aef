#include "fedmap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fedmap/rng.hpp"

namespace fedmap {

void Dataset::sort_rows() {
  if (!is_test.empty() && is_test.size() != rows.size()) {
    throw DataError("split flags out of sync with rows");
  }
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].user_id != rows[b].user_id) return rows[a].user_id < rows[b].user_id;
    return rows[a].timestamp < rows[b].timestamp;
  });
  std::vector<Measurement> sorted;
  sorted.reserve(rows.size());
  std::vector<bool> sorted_test;
  if (!is_test.empty()) sorted_test.reserve(rows.size());
  for (std::size_t i : order) {
    sorted.push_back(std::move(rows[i]));
    if (!is_test.empty()) sorted_test.push_back(is_test[i]);
  }
  rows = std::move(sorted);
  is_test = std::move(sorted_test);
}

std::vector<std::size_t> Dataset::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!row_is_test(i)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Dataset::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (row_is_test(i)) out.push_back(i);
  }
  return out;
}

std::vector<int> Dataset::users() const {
  std::set<int> ids;
  for (const auto& m : rows) ids.insert(m.user_id);
  return {ids.begin(), ids.end()};
}

void assign_split(Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test_fraction must lie in [0, 1)");
  }
  ds.is_test.assign(ds.rows.size(), false);
  Rng rng(derive_seed(seed, {0x5e1fULL}));
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    ds.is_test[i] = rng.next_double() < test_fraction;
  }
}

namespace {

struct Moments {
  double mean = 0.0;
  double std_dev = 0.0;
};

Moments fit_dim(const std::vector<double>& v, const char* name) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= static_cast<double>(v.size());
  if (var <= 0.0) {
    throw DataError(std::string("degenerate feature (constant column): ") + name);
  }
  return {mean, std::sqrt(var)};
}

}  // namespace

Standardizer Standardizer::fit(const Dataset& ds) {
  auto idx = ds.train_indices();
  if (idx.size() < 2) throw DataError("standardizer needs at least 2 train rows");
  std::vector<double> e, n, y;
  e.reserve(idx.size());
  n.reserve(idx.size());
  y.reserve(idx.size());
  for (std::size_t i : idx) {
    e.push_back(ds.rows[i].easting);
    n.push_back(ds.rows[i].northing);
    y.push_back(ds.rows[i].rsrp);
  }
  Standardizer st;
  auto me = fit_dim(e, "easting");
  auto mn = fit_dim(n, "northing");
  auto my = fit_dim(y, "rsrp");
  st.mean_e = me.mean;
  st.std_e = me.std_dev;
  st.mean_n = mn.mean;
  st.std_n = mn.std_dev;
  st.mean_y = my.mean;
  st.std_y = my.std_dev;
  st.fitted = true;
  return st;
}

std::vector<Sample> to_samples(const Standardizer& st,
                               std::span<const Measurement> rows) {
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (const auto& m : rows) out.push_back(st.to_sample(m));
  return out;
}

}  // namespace fedmap
