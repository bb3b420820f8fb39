#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tsfc/dataset.hpp"
#include "tsfc/feature_matrix.hpp"

namespace tsfc::kernels {

/// A dilated 1-D convolution kernel. With padding the input is zero-padded by
/// ((l-1)*dilation)/2 on the left so the output has the input's length.
struct Kernel {
  std::vector<double> weights;
  double bias = 0.0;
  std::size_t dilation = 1;
  bool padding = false;
};

/// activation[t] = sum_j weights[j] * x[t + j*dilation] - bias.
/// Throws KernelTooLarge if an unpadded kernel spans more than the series.
std::vector<double> dilated_convolve(std::span<const double> series, const Kernel& kernel);

enum class Pooling { Ppv, Max, Mpv, Mipv, Lspv, Mean };

std::string_view to_string(Pooling op) noexcept;

/// Pools an activation sequence. "Positive" means strictly > 0 throughout.
///   ppv  fraction of positive values
///   max  maximum
///   mpv  mean of positive values (0 when none)
///   mipv mean index of positive values / (len-1) (0 when none or len == 1)
///   lspv longest run of consecutive positive values
///   mean arithmetic mean
double pool(std::span<const double> activations, Pooling op);

std::vector<double> first_difference(std::span<const double> series);

/// n series of common length m, row-major.
struct SeriesMatrix {
  std::vector<double> values;
  std::size_t n = 0;
  std::size_t m = 0;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * m, m}; }

  static SeriesMatrix from(const TimeSeriesDataset& dataset);
  /// First-order difference of every row (m - 1 columns).
  static SeriesMatrix differenced(const SeriesMatrix& base);
};

/// Random kernels with max + ppv pooling.
class Rocket {
 public:
  static Rocket fit(std::size_t series_length, std::size_t n_kernels, std::uint64_t seed);

  FeatureMatrix transform(const TimeSeriesDataset& dataset) const;
  std::size_t feature_count() const noexcept { return 2 * kernels_.size(); }
  const std::vector<Kernel>& kernels() const noexcept { return kernels_; }
  std::size_t series_length() const noexcept { return length_; }

  bool operator==(const Rocket&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<Kernel> kernels_;
};

/// One (pattern, dilation) member of the fixed bank with its fitted biases.
struct BankInstance {
  std::size_t pattern = 0;
  std::size_t dilation = 1;
  bool padded = true;  // pool over the full padded output, else over the valid centre only
  std::vector<double> biases;

  bool operator==(const BankInstance&) const = default;
};

/// The 84 length-9 patterns (three taps at beta, six at alpha) with
/// log-spaced dilations and quantile biases fitted on training series.
class FixedKernelBank {
 public:
  static constexpr std::size_t kPatterns = 84;
  static constexpr std::size_t kLength = 9;
  static constexpr std::size_t kMaxDilations = 32;
  static constexpr double kAlpha = -1.0;
  static constexpr double kBeta = 2.0;

  /// Positions of the three beta taps, in lexicographic order.
  static const std::vector<std::array<std::size_t, 3>>& beta_positions();
  static std::array<double, kLength> pattern_weights(std::size_t pattern);

  /// Dilations and their bias counts for a series length and a per-pattern
  /// feature count; counts sum to features_per_pattern.
  static std::vector<std::pair<std::size_t, std::size_t>> fit_dilations(
      std::size_t series_length, std::size_t features_per_pattern);

  /// Fits floor(budget / 84) biased kernels per pattern. Throws BudgetTooSmall
  /// when budget < 84.
  static FixedKernelBank fit(const SeriesMatrix& train, std::size_t budget, std::uint64_t seed);

  /// Unbiased convolution of a series with one instance (length m, zero padded).
  std::vector<double> convolve(std::span<const double> series, const BankInstance& inst) const;
  /// The slice of a convolution output the instance pools over.
  std::span<const double> pooled_region(std::span<const double> conv, const BankInstance& inst) const;

  std::size_t series_length() const noexcept { return length_; }
  std::size_t feature_count() const noexcept;
  const std::vector<BankInstance>& instances() const noexcept { return instances_; }

  bool operator==(const FixedKernelBank&) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<BankInstance> instances_;
};

/// ppv over the fixed bank.
class MiniRocket {
 public:
  static MiniRocket fit(const TimeSeriesDataset& train, std::size_t feature_budget, std::uint64_t seed);

  FeatureMatrix transform(const TimeSeriesDataset& dataset) const;
  std::size_t feature_count() const noexcept { return bank_.feature_count(); }
  const FixedKernelBank& bank() const noexcept { return bank_; }

 private:
  FixedKernelBank bank_;
};

/// Fixed bank applied to the series and its first difference with several
/// pooling operators per biased kernel.
class MultiRocket {
 public:
  static constexpr std::array<Pooling, 6> kPoolingOrder{Pooling::Ppv, Pooling::Mpv, Pooling::Mipv,
                                                        Pooling::Lspv, Pooling::Max, Pooling::Mean};

  /// features_per_kernel must be 4 or 6; n_kernel_instances >= 84.
  static MultiRocket fit(const TimeSeriesDataset& train, std::size_t n_kernel_instances,
                         std::size_t features_per_kernel, std::uint64_t seed);

  FeatureMatrix transform(const TimeSeriesDataset& dataset) const;
  std::size_t feature_count() const noexcept;
  const FixedKernelBank& base_bank() const noexcept { return base_; }
  const FixedKernelBank& diff_bank() const noexcept { return diff_; }

 private:
  FixedKernelBank base_;
  FixedKernelBank diff_;
  std::size_t features_per_kernel_ = 4;
};

FeatureMatrix rocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                               std::size_t n_kernels, std::uint64_t seed);
FeatureMatrix minirocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                                   std::size_t feature_budget, std::uint64_t seed);
FeatureMatrix multirocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                                    std::size_t n_kernel_instances, std::size_t features_per_kernel,
                                    std::uint64_t seed);

}  // namespace tsfc::kernels
