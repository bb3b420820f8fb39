#include "tsfc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tsfc/error.hpp"
#include "tsfc/numeric.hpp"
#include "tsfc/random.hpp"

namespace tsfc::kernels {

std::vector<double> dilated_convolve(std::span<const double> series, const Kernel& kernel) {
  const auto m = series.size();
  const auto l = kernel.weights.size();
  if (l == 0 || kernel.dilation == 0) throw Error(ErrorKind::KernelTooLarge, "empty kernel or zero dilation");
  const auto span = (l - 1) * kernel.dilation;

  if (!kernel.padding) {
    if (span >= m) {
      throw Error(ErrorKind::KernelTooLarge, "kernel span " + std::to_string(span + 1) +
                                                 " exceeds series length " + std::to_string(m));
    }
    std::vector<double> out(m - span);
    for (std::size_t t = 0; t < out.size(); ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += kernel.weights[j] * series[t + j * kernel.dilation];
      out[t] = s - kernel.bias;
    }
    return out;
  }

  const auto pad = static_cast<std::ptrdiff_t>(span / 2);
  const auto sm = static_cast<std::ptrdiff_t>(m);
  const auto dil = static_cast<std::ptrdiff_t>(kernel.dilation);
  std::vector<double> out(m);
  for (std::ptrdiff_t t = 0; t < sm; ++t) {
    double s = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const auto idx = t - pad + static_cast<std::ptrdiff_t>(j) * dil;
      if (idx >= 0 && idx < sm) s += kernel.weights[j] * series[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(t)] = s - kernel.bias;
  }
  return out;
}

std::string_view to_string(Pooling op) noexcept {
  switch (op) {
    case Pooling::Ppv: return "ppv";
    case Pooling::Max: return "max";
    case Pooling::Mpv: return "mpv";
    case Pooling::Mipv: return "mipv";
    case Pooling::Lspv: return "lspv";
    case Pooling::Mean: return "mean";
  }
  return "unknown";
}

double pool(std::span<const double> a, Pooling op) {
  if (a.empty()) throw Error(ErrorKind::EmptyActivations, "cannot pool an empty activation");
  const auto len = static_cast<double>(a.size());
  switch (op) {
    case Pooling::Ppv: {
      std::size_t positive = 0;
      for (const double v : a) positive += v > 0.0;
      return static_cast<double>(positive) / len;
    }
    case Pooling::Max:
      return *std::max_element(a.begin(), a.end());
    case Pooling::Mpv: {
      double sum = 0.0;
      std::size_t positive = 0;
      for (const double v : a) {
        if (v > 0.0) {
          sum += v;
          ++positive;
        }
      }
      return positive == 0 ? 0.0 : sum / static_cast<double>(positive);
    }
    case Pooling::Mipv: {
      if (a.size() == 1) return 0.0;
      double sum = 0.0;
      std::size_t positive = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 0.0) {
          sum += static_cast<double>(i);
          ++positive;
        }
      }
      return positive == 0 ? 0.0 : sum / static_cast<double>(positive) / (len - 1.0);
    }
    case Pooling::Lspv: {
      std::size_t best = 0, run = 0;
      for (const double v : a) {
        run = v > 0.0 ? run + 1 : 0;
        best = std::max(best, run);
      }
      return static_cast<double>(best);
    }
    case Pooling::Mean:
      return mean_of(a);
  }
  return 0.0;
}

std::vector<double> first_difference(std::span<const double> series) {
  if (series.size() < 2) throw Error(ErrorKind::TooShort, "first difference needs at least 2 points");
  std::vector<double> out(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) out[i] = series[i + 1] - series[i];
  return out;
}

SeriesMatrix SeriesMatrix::from(const TimeSeriesDataset& dataset) {
  return {std::vector<double>(dataset.values().begin(), dataset.values().end()), dataset.size(),
          dataset.length()};
}

SeriesMatrix SeriesMatrix::differenced(const SeriesMatrix& base) {
  SeriesMatrix out{{}, base.n, base.m - 1};
  out.values.reserve(out.n * out.m);
  for (std::size_t i = 0; i < base.n; ++i) {
    const auto d = first_difference(base.row(i));
    out.values.insert(out.values.end(), d.begin(), d.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// ROCKET

Rocket Rocket::fit(std::size_t series_length, std::size_t n_kernels, std::uint64_t seed) {
  if (n_kernels == 0) throw Error(ErrorKind::InvalidConfig, "n_kernels must be >= 1");
  constexpr std::array<std::size_t, 3> kLengths{7, 9, 11};
  Rng rng(seed);
  Rocket r;
  r.length_ = series_length;
  r.kernels_.reserve(n_kernels);
  for (std::size_t k = 0; k < n_kernels; ++k) {
    Kernel kernel;
    const auto l = kLengths[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    kernel.weights.resize(l);
    for (auto& w : kernel.weights) w = rng.normal();
    const double centre = mean_of(kernel.weights);
    for (auto& w : kernel.weights) w -= centre;
    kernel.bias = rng.uniform(-1.0, 1.0);

    const double ratio = static_cast<double>(series_length - 1) / static_cast<double>(l - 1);
    const double max_exponent = ratio > 1.0 ? std::log2(ratio) : 0.0;
    const double u = rng.uniform(0.0, max_exponent);
    kernel.dilation = std::size_t{1} << static_cast<unsigned>(std::floor(u));
    kernel.padding = rng.coin();
    // series shorter than the kernel: only the padded form has an output
    if ((l - 1) * kernel.dilation >= series_length) kernel.padding = true;
    r.kernels_.push_back(std::move(kernel));
  }
  return r;
}

FeatureMatrix Rocket::transform(const TimeSeriesDataset& dataset) const {
  if (dataset.length() != length_) {
    throw Error(ErrorKind::DimensionMismatch, "series length differs from the fitted length");
  }
  std::vector<std::string> names;
  names.reserve(feature_count());
  for (std::size_t k = 0; k < kernels_.size(); ++k) {
    names.push_back("rocket_k" + std::to_string(k) + "_ppv");
    names.push_back("rocket_k" + std::to_string(k) + "_max");
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"rocket", "n_kernels=" + std::to_string(kernels_.size())});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    auto row = out.row(i);
    for (std::size_t k = 0; k < kernels_.size(); ++k) {
      const auto a = dilated_convolve(x, kernels_[k]);
      row[2 * k] = pool(a, Pooling::Ppv);
      row[2 * k + 1] = pool(a, Pooling::Max);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed bank

const std::vector<std::array<std::size_t, 3>>& FixedKernelBank::beta_positions() {
  static const auto positions = [] {
    std::vector<std::array<std::size_t, 3>> out;
    for (std::size_t a = 0; a < kLength; ++a)
      for (std::size_t b = a + 1; b < kLength; ++b)
        for (std::size_t c = b + 1; c < kLength; ++c) out.push_back({a, b, c});
    return out;
  }();
  return positions;
}

std::array<double, FixedKernelBank::kLength> FixedKernelBank::pattern_weights(std::size_t pattern) {
  std::array<double, kLength> w;
  w.fill(kAlpha);
  for (const auto p : beta_positions().at(pattern)) w[p] = kBeta;
  return w;
}

std::vector<std::pair<std::size_t, std::size_t>> FixedKernelBank::fit_dilations(
    std::size_t series_length, std::size_t features_per_pattern) {
  const auto n_dilations = std::min(features_per_pattern, kMaxDilations);
  const double multiplier =
      static_cast<double>(features_per_pattern) / static_cast<double>(n_dilations);
  const double ratio = static_cast<double>(series_length) - 1.0;
  const double max_exponent =
      ratio > static_cast<double>(kLength - 1) ? std::log2(ratio / static_cast<double>(kLength - 1)) : 0.0;

  std::vector<std::pair<std::size_t, std::size_t>> dilations;
  for (std::size_t i = 0; i < n_dilations; ++i) {
    const double e = n_dilations == 1
                         ? 0.0
                         : max_exponent * static_cast<double>(i) / static_cast<double>(n_dilations - 1);
    const auto d = static_cast<std::size_t>(std::floor(std::pow(2.0, e)));
    if (!dilations.empty() && dilations.back().first == d) {
      ++dilations.back().second;
    } else {
      dilations.emplace_back(d, 1);
    }
  }
  std::size_t assigned = 0;
  for (auto& [d, count] : dilations) {
    count = static_cast<std::size_t>(static_cast<double>(count) * multiplier);
    assigned += count;
  }
  for (std::size_t i = 0; assigned < features_per_pattern; i = (i + 1) % dilations.size()) {
    ++dilations[i].second;
    ++assigned;
  }
  return dilations;
}

std::vector<double> FixedKernelBank::convolve(std::span<const double> series,
                                              const BankInstance& inst) const {
  const auto w = pattern_weights(inst.pattern);
  return dilated_convolve(series, Kernel{{w.begin(), w.end()}, 0.0, inst.dilation, true});
}

std::span<const double> FixedKernelBank::pooled_region(std::span<const double> conv,
                                                       const BankInstance& inst) const {
  const auto edge = (kLength - 1) / 2 * inst.dilation;
  if (inst.padded || 2 * edge >= conv.size()) return conv;
  return conv.subspan(edge, conv.size() - 2 * edge);
}

std::size_t FixedKernelBank::feature_count() const noexcept {
  std::size_t total = 0;
  for (const auto& inst : instances_) total += inst.biases.size();
  return total;
}

FixedKernelBank FixedKernelBank::fit(const SeriesMatrix& train, std::size_t budget, std::uint64_t seed) {
  if (budget < kPatterns) {
    throw Error(ErrorKind::BudgetTooSmall,
                "feature budget " + std::to_string(budget) + " is below " + std::to_string(kPatterns));
  }
  if (train.n == 0) throw Error(ErrorKind::InvalidSize, "no training series");

  FixedKernelBank bank;
  bank.length_ = train.m;
  const auto dilations = fit_dilations(train.m, budget / kPatterns);
  const auto sample_size =
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(train.n))));

  Rng rng(seed);
  std::vector<std::size_t> order(train.n);
  std::vector<double> pooled;
  for (std::size_t di = 0; di < dilations.size(); ++di) {
    const auto [dilation, count] = dilations[di];
    for (std::size_t p = 0; p < kPatterns; ++p) {
      BankInstance inst{p, dilation, (di + p) % 2 == 0, {}};

      // partial Fisher-Yates: the first sample_size entries are the sample
      for (std::size_t i = 0; i < train.n; ++i) order[i] = i;
      for (std::size_t i = 0; i < sample_size; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(train.n) - 1));
        std::swap(order[i], order[j]);
      }
      pooled.clear();
      for (std::size_t s = 0; s < sample_size; ++s) {
        const auto conv = bank.convolve(train.row(order[s]), inst);
        const auto region = bank.pooled_region(conv, inst);
        pooled.insert(pooled.end(), region.begin(), region.end());
      }
      std::sort(pooled.begin(), pooled.end());
      inst.biases.reserve(count);
      for (std::size_t b = 0; b < count; ++b) {
        inst.biases.push_back(
            quantile_sorted(pooled, static_cast<double>(b + 1) / static_cast<double>(count + 1)));
      }
      bank.instances_.push_back(std::move(inst));
    }
  }
  return bank;
}

// ---------------------------------------------------------------------------
// MiniROCKET

MiniRocket MiniRocket::fit(const TimeSeriesDataset& train, std::size_t feature_budget,
                           std::uint64_t seed) {
  MiniRocket r;
  r.bank_ = FixedKernelBank::fit(SeriesMatrix::from(train), feature_budget, seed);
  return r;
}

FeatureMatrix MiniRocket::transform(const TimeSeriesDataset& dataset) const {
  if (dataset.length() != bank_.series_length()) {
    throw Error(ErrorKind::DimensionMismatch, "series length differs from the fitted length");
  }
  std::vector<std::string> names;
  names.reserve(feature_count());
  for (const auto& inst : bank_.instances()) {
    for (std::size_t b = 0; b < inst.biases.size(); ++b) {
      names.push_back("minirocket_p" + std::to_string(inst.pattern) + "_d" +
                      std::to_string(inst.dilation) + "_b" + std::to_string(b) + "_ppv");
    }
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"minirocket", "features=" + std::to_string(feature_count())});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    auto row = out.row(i);
    std::size_t col = 0;
    for (const auto& inst : bank_.instances()) {
      const auto conv = bank_.convolve(x, inst);
      const auto region = bank_.pooled_region(conv, inst);
      for (const double bias : inst.biases) {
        std::size_t positive = 0;
        for (const double v : region) positive += v > bias;
        row[col++] = static_cast<double>(positive) / static_cast<double>(region.size());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MultiROCKET

MultiRocket MultiRocket::fit(const TimeSeriesDataset& train, std::size_t n_kernel_instances,
                             std::size_t features_per_kernel, std::uint64_t seed) {
  if (features_per_kernel != 4 && features_per_kernel != 6) {
    throw Error(ErrorKind::InvalidConfig, "features_per_kernel must be 4 or 6");
  }
  const auto base = SeriesMatrix::from(train);
  MultiRocket r;
  r.features_per_kernel_ = features_per_kernel;
  r.base_ = FixedKernelBank::fit(base, n_kernel_instances, derive_seed(seed, 0));
  r.diff_ = FixedKernelBank::fit(SeriesMatrix::differenced(base), n_kernel_instances, derive_seed(seed, 1));
  return r;
}

std::size_t MultiRocket::feature_count() const noexcept {
  return (base_.feature_count() + diff_.feature_count()) * features_per_kernel_;
}

FeatureMatrix MultiRocket::transform(const TimeSeriesDataset& dataset) const {
  if (dataset.length() != base_.series_length()) {
    throw Error(ErrorKind::DimensionMismatch, "series length differs from the fitted length");
  }
  const std::array<std::pair<const FixedKernelBank*, const char*>, 2> reps{
      {{&base_, "base"}, {&diff_, "diff"}}};

  std::vector<std::string> names;
  names.reserve(feature_count());
  for (const auto& [bank, tag] : reps) {
    for (const auto& inst : bank->instances()) {
      for (std::size_t b = 0; b < inst.biases.size(); ++b) {
        for (std::size_t f = 0; f < features_per_kernel_; ++f) {
          names.push_back(std::string("multirocket_") + tag + "_p" + std::to_string(inst.pattern) +
                          "_d" + std::to_string(inst.dilation) + "_b" + std::to_string(b) + "_" +
                          std::string(to_string(kPoolingOrder[f])));
        }
      }
    }
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"multirocket", "features_per_kernel=" +
                                                        std::to_string(features_per_kernel_)});
  std::vector<double> shifted;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    const auto dx = first_difference(x);
    auto row = out.row(i);
    std::size_t col = 0;
    for (const auto& [bank, tag] : reps) {
      const std::span<const double> series = bank == &base_ ? x : std::span<const double>(dx);
      for (const auto& inst : bank->instances()) {
        const auto conv = bank->convolve(series, inst);
        const auto region = bank->pooled_region(conv, inst);
        for (const double bias : inst.biases) {
          shifted.assign(region.begin(), region.end());
          for (auto& v : shifted) v -= bias;
          for (std::size_t f = 0; f < features_per_kernel_; ++f) {
            row[col++] = pool(shifted, kPoolingOrder[f]);
          }
        }
      }
    }
  }
  return out;
}

FeatureMatrix rocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                               std::size_t n_kernels, std::uint64_t seed) {
  return Rocket::fit(train.length(), n_kernels, seed).transform(apply_to);
}

FeatureMatrix minirocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                                   std::size_t feature_budget, std::uint64_t seed) {
  return MiniRocket::fit(train, feature_budget, seed).transform(apply_to);
}

FeatureMatrix multirocket_transform(const TimeSeriesDataset& train, const TimeSeriesDataset& apply_to,
                                    std::size_t n_kernel_instances, std::size_t features_per_kernel,
                                    std::uint64_t seed) {
  return MultiRocket::fit(train, n_kernel_instances, features_per_kernel, seed).transform(apply_to);
}

}  // namespace tsfc::kernels
