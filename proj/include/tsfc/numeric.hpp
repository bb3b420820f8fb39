#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace tsfc {

/// Type-7 quantile (linear interpolation between order statistics) of an
/// ascending-sorted, non-empty range.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace tsfc
