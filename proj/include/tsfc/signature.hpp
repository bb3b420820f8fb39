#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsfc/dataset.hpp"
#include "tsfc/feature_matrix.hpp"

namespace tsfc::signature {

/// Truncated tensor-algebra element (level 0 is the implicit scalar 1).
/// Level k holds dim^k coefficients; word (i_1..i_k) lives at index
/// sum_j i_j * dim^(k-j) (lexicographic, 0-based letters).
class TensorSignature {
 public:
  TensorSignature() = default;
  /// The zero signature (identity for concatenation).
  TensorSignature(std::size_t dim, std::size_t depth);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t depth() const noexcept { return levels_.size(); }

  /// Level k in 1..depth.
  std::span<double> level(std::size_t k) { return levels_.at(k - 1); }
  std::span<const double> level(std::size_t k) const { return levels_.at(k - 1); }

  /// Levels 1..depth concatenated.
  std::vector<double> flatten() const;

  /// sum_{k=1..depth} dim^k
  static std::size_t term_count(std::size_t dim, std::size_t depth);

 private:
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> levels_;
};

/// Signature of one straight segment with the given increment: level k is
/// the k-fold tensor power of the increment divided by k!.
TensorSignature segment_signature(std::span<const double> increment, std::size_t depth);

/// Chen's relation: level k of the result is sum_{i+j=k} a_i (x) b_j.
/// Throws DimensionMismatch on unequal dim or depth.
TensorSignature chen_concat(const TensorSignature& a, const TensorSignature& b);

/// Piecewise-linear path in R^dim, points stored row-major.
struct Path {
  std::vector<double> points;
  std::size_t dim = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
  std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

/// (t_i, x_i) with t_i = i / (m - 1).
Path time_augment(std::span<const double> series);

/// Signature of the whole path. Throws PathTooShort below two points.
TensorSignature signature(const Path& path, std::size_t depth);
/// Signature of the sub-path through points first..last (inclusive).
TensorSignature signature(const Path& path, std::size_t first, std::size_t last, std::size_t depth);

/// Point-index window; consecutive windows of one level share their
/// boundary point so their segments partition the path.
struct Window {
  std::size_t level = 0;
  std::size_t index = 0;
  std::size_t first = 0;
  std::size_t last = 0;

  bool operator==(const Window&) const = default;
};

/// Levels 0..window_depth, level l split into 2^l windows whose segment
/// counts differ by at most one. Requires m >= 2^window_depth + 1.
std::vector<Window> dyadic_windows(std::size_t m, std::size_t window_depth);

/// Human-readable word label, 1-based letters: "S(1,2)".
std::string word_name(std::size_t dim, std::size_t level, std::size_t index);

/// Time-augmented signature over every dyadic window, window-major.
FeatureMatrix signature_transform(const TimeSeriesDataset& dataset, std::size_t sig_depth = 4,
                                  std::size_t window_depth = 4);

}  // namespace tsfc::signature
