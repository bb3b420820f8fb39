#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tsfc {

/// Where a column came from: the extractor and its parameter string.
struct ColumnProvenance {
  std::string extractor;
  std::string parameters;

  bool operator==(const ColumnProvenance&) const = default;
};

/// Dense row-major n x F table with named columns.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> names, ColumnProvenance provenance);
  FeatureMatrix(std::size_t rows, std::vector<std::string> names,
                std::vector<ColumnProvenance> provenance, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return names_.size(); }

  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<ColumnProvenance>& provenance() const noexcept { return provenance_; }

  /// Replaces NaN/Inf with 0 and returns the number of replaced cells.
  std::size_t replace_non_finite();

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<ColumnProvenance> provenance_;
  std::vector<double> values_;
};

/// Column concatenation; all inputs must have the same row count.
FeatureMatrix hconcat(std::span<const FeatureMatrix> blocks);

}  // namespace tsfc
