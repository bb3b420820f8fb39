#include "tsfc/featurebank.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tsfc/error.hpp"
#include "tsfc/numeric.hpp"

namespace tsfc::featurebank {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static constexpr std::array<std::string_view, kFeatureCount> names{
      "mean",          "std",           "skewness",
      "excess_kurtosis", "min",         "max",
      "median",        "iqr",           "q25",
      "q75",           "ols_slope",     "ols_r2",
      "acf_lag1",      "acf_lag2",      "acf_first_below_inv_e",
      "mean_crossing_rate", "longest_above_mean", "mean_abs_diff",
      "outlier_fraction_2sd", "spectral_centroid", "spectral_entropy",
      "diff_variance_ratio"};
  return names;
}

namespace {

// Biased autocorrelation at one lag; `centred` has zero mean.
double acf(std::span<const double> centred, double sum_sq, std::size_t lag) {
  double s = 0.0;
  for (std::size_t t = 0; t + lag < centred.size(); ++t) s += centred[t] * centred[t + lag];
  return s / sum_sq;
}

}  // namespace

namespace {

std::array<double, kFeatureCount> compute_unit_scale(std::span<const double> x) {
  const auto n = x.size();
  const double len = static_cast<double>(n);
  std::array<double, kFeatureCount> out{};

  const double mean = mean_of(x);
  std::vector<double> c(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = x[i] - mean;
    const double sq = c[i] * c[i];
    m2 += sq;
    m3 += sq * c[i];
    m4 += sq * sq;
    scale = std::max(scale, std::abs(x[i]));
  }
  const double sum_sq = m2;
  m2 /= len;
  m3 /= len;
  m4 /= len;
  const double sd = std::sqrt(m2);
  // rounding in the mean leaves ~1e-17 residue on constant windows
  const bool degenerate = sd <= 1e-12 * scale || sd == 0.0;

  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double q25 = quantile_sorted(sorted, 0.25);
  const double q75 = quantile_sorted(sorted, 0.75);

  out[0] = mean;
  out[1] = degenerate ? 0.0 : sd;
  out[4] = sorted.front();
  out[5] = sorted.back();
  out[6] = quantile_sorted(sorted, 0.5);
  out[7] = q75 - q25;
  out[8] = q25;
  out[9] = q75;

  double mad = 0.0, diff_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = x[i + 1] - x[i];
    mad += std::abs(d);
    diff_sum += d;
  }
  out[17] = mad / (len - 1.0);

  if (degenerate) return out;  // every remaining feature takes the 0 sentinel

  out[2] = m3 / (m2 * sd);
  out[3] = m4 / (m2 * m2) - 3.0;

  // OLS against t = 0..n-1
  const double t_mean = (len - 1.0) / 2.0;
  double stt = 0.0, stx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - t_mean;
    stt += dt * dt;
    stx += dt * c[i];
  }
  out[10] = stx / stt;
  out[11] = (stx * stx) / (stt * sum_sq);

  out[12] = acf(c, sum_sq, 1);
  out[13] = acf(c, sum_sq, 2);
  out[14] = 1.0;
  for (std::size_t lag = 1; lag < n; ++lag) {
    if (acf(c, sum_sq, lag) < std::exp(-1.0)) {
      out[14] = static_cast<double>(lag) / len;
      break;
    }
  }

  std::size_t crossings = 0, run = 0, longest = 0, outliers = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && c[i] * c[i + 1] < 0.0) ++crossings;
    run = c[i] > 0.0 ? run + 1 : 0;
    longest = std::max(longest, run);
    if (std::abs(c[i]) > 2.0 * sd) ++outliers;
  }
  out[15] = static_cast<double>(crossings) / (len - 1.0);
  out[16] = static_cast<double>(longest) / len;
  out[18] = static_cast<double>(outliers) / len;

  // Periodogram over k = 1..floor(n/2).
  // TODO: switch to an FFT once windows routinely exceed a few thousand points.
  const std::size_t bins = n / 2;
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double angle = 2.0 * M_PI * static_cast<double>(j) / len;
    cos_table[j] = std::cos(angle);
    sin_table[j] = std::sin(angle);
  }
  std::vector<double> power(bins);
  double total = 0.0, weighted = 0.0;
  for (std::size_t k = 1; k <= bins; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += c[t] * cos_table[idx];
      im -= c[t] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    power[k - 1] = re * re + im * im;
    total += power[k - 1];
    weighted += power[k - 1] * static_cast<double>(k) / len;
  }
  if (total > 0.0) {
    out[19] = weighted / total;
    if (bins > 1) {
      double h = 0.0;
      for (const double p : power) {
        if (p > 0.0) h -= (p / total) * std::log(p / total);
      }
      out[20] = h / std::log(static_cast<double>(bins));
    }
  }

  const double diff_mean = diff_sum / (len - 1.0);
  double diff_var = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = x[i + 1] - x[i] - diff_mean;
    diff_var += d * d;
  }
  diff_var /= (len - 1.0);
  out[21] = diff_var / m2;
  return out;
}

}  // namespace

std::array<double, kFeatureCount> compute_bank(std::span<const double> x) {
  const auto n = x.size();
  if (n < kMinWindow) {
    throw Error(ErrorKind::WindowTooShort, "window of length " + std::to_string(n) + " (need >= 3)");
  }
  double peak = 0.0;
  for (const double v : x) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return compute_unit_scale(x);

  // power-of-two rescaling is exact and keeps moments away from over/underflow
  int exponent = 0;
  std::frexp(peak, &exponent);
  std::vector<double> scaled(x.begin(), x.end());
  for (auto& v : scaled) v = std::ldexp(v, -exponent);
  auto out = compute_unit_scale(scaled);
  for (const std::size_t id : {0, 1, 4, 5, 6, 7, 8, 9, 10, 17}) out[id] = std::ldexp(out[id], exponent);
  return out;
}

}  // namespace tsfc::featurebank
