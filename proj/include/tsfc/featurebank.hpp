#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace tsfc::featurebank {

inline constexpr std::size_t kFeatureCount = 22;
inline constexpr std::size_t kMinWindow = 3;

/// Stable feature names, indexed by id. Definitions (n = window length,
/// statistics use 1/n normalisation; zero-variance windows yield 0 for every
/// ratio that divides by the variance):
///
///  0 mean                  11 ols_r2
///  1 std                   12 acf_lag1
///  2 skewness              13 acf_lag2
///  3 excess_kurtosis       14 acf_first_below_inv_e  (lag / n; 1 if never)
///  4 min                   15 mean_crossing_rate     (crossings / (n-1))
///  5 max                   16 longest_above_mean     (run / n)
///  6 median                17 mean_abs_diff
///  7 iqr                   18 outlier_fraction_2sd   (|x-mean| > 2 std)
///  8 q25                   19 spectral_centroid      (cycles/sample, periodogram)
///  9 q75                   20 spectral_entropy       (normalised to [0, 1])
/// 10 ols_slope             21 diff_variance_ratio    (var(diff x) / var(x))
const std::array<std::string_view, kFeatureCount>& feature_names();

/// Evaluates the bank on a window of at least 3 finite values.
/// Throws WindowTooShort for shorter input.
std::array<double, kFeatureCount> compute_bank(std::span<const double> window);

}  // namespace tsfc::featurebank
