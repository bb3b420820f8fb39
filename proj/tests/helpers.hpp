#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsfc/dataset.hpp"
#include "tsfc/error.hpp"
#include "tsfc/feature_matrix.hpp"
#include "tsfc/random.hpp"

namespace tsfc::testing {

inline TimeSeriesDataset make_dataset(const std::vector<std::vector<double>>& rows,
                                      const std::vector<std::string>& labels, Split split = Split::Train,
                                      const std::string& name = "fixture") {
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return {name, rows.front().size(), std::move(values), labels, split};
}

inline FeatureMatrix make_matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
  return {rows, std::move(names), std::vector<ColumnProvenance>(cols, ColumnProvenance{"test", ""}),
          std::move(values)};
}

struct Tabular {
  FeatureMatrix x;
  std::vector<std::string> y;
};

/// Two Gaussian blobs whose means differ by `separation` along every axis.
inline Tabular blobs(std::size_t n, std::size_t f, double separation, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v;
  std::vector<std::string> y;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    for (std::size_t c = 0; c < f; ++c) v.push_back(rng.normal() + (pos ? separation / 2 : -separation / 2));
    y.push_back(pos ? "pos" : "neg");
  }
  return {make_matrix(n, f, std::move(v)), std::move(y)};
}

/// Four clusters on the corners of a square labelled by XOR of the quadrant.
inline Tabular xor_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v;
  std::vector<std::string> y;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
    v.push_back((a ? 1.0 : -1.0) + 0.25 * rng.normal());
    v.push_back((b ? 1.0 : -1.0) + 0.25 * rng.normal());
    y.push_back((a ^ b) ? "one" : "zero");
  }
  return {make_matrix(n, 2, std::move(v)), std::move(y)};
}

/// Kind of the tsfc::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<ErrorKind> error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace tsfc::testing
