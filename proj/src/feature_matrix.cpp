#include "tsfc/feature_matrix.hpp"

#include <cmath>

#include "tsfc/error.hpp"

namespace tsfc {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> names,
                             ColumnProvenance provenance)
    : rows_(rows),
      names_(std::move(names)),
      provenance_(names_.size(), std::move(provenance)),
      values_(rows * names_.size(), 0.0) {}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> names,
                             std::vector<ColumnProvenance> provenance, std::vector<double> values)
    : rows_(rows),
      names_(std::move(names)),
      provenance_(std::move(provenance)),
      values_(std::move(values)) {
  if (provenance_.size() != names_.size() || values_.size() != rows_ * names_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "feature matrix shape mismatch");
  }
}

std::size_t FeatureMatrix::replace_non_finite() {
  std::size_t replaced = 0;
  for (auto& v : values_) {
    if (!std::isfinite(v)) {
      v = 0.0;
      ++replaced;
    }
  }
  return replaced;
}

FeatureMatrix hconcat(std::span<const FeatureMatrix> blocks) {
  if (blocks.empty()) return {};
  const auto rows = blocks.front().rows();
  std::vector<std::string> names;
  std::vector<ColumnProvenance> provenance;
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw Error(ErrorKind::RowMismatch, "cannot concatenate blocks with different row counts");
    names.insert(names.end(), b.names().begin(), b.names().end());
    provenance.insert(provenance.end(), b.provenance().begin(), b.provenance().end());
    cols += b.cols();
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& b : blocks) {
      const auto x = b.row(r);
      values.insert(values.end(), x.begin(), x.end());
    }
  }
  return {rows, std::move(names), std::move(provenance), std::move(values)};
}

}  // namespace tsfc
