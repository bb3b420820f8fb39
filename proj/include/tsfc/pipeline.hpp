#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsfc/classifiers.hpp"
#include "tsfc/dataset.hpp"
#include "tsfc/feature_matrix.hpp"
#include "tsfc/intervals.hpp"

namespace tsfc::pipeline {

enum class ExtractorKind {
  Rocket,
  MiniRocket,
  MultiRocket,
  IntervalsSummary,
  IntervalsBank,
  FeaturebankGlobal,
  Signature,
};

std::string_view to_string(ExtractorKind kind) noexcept;
/// Throws InvalidConfig on an unknown name.
ExtractorKind parse_extractor_kind(std::string_view name);
const std::vector<ExtractorKind>& all_extractor_kinds();

/// Extractor choice and parameters. Only the fields of the chosen kind matter.
struct ExtractorConfig {
  ExtractorKind kind = ExtractorKind::MiniRocket;
  std::size_t n_kernels = 500;           // rocket
  std::size_t feature_budget = 1000;     // minirocket
  std::size_t n_kernel_instances = 125;  // multirocket, per representation
  std::size_t features_per_kernel = 6;   // multirocket
  std::size_t n_intervals = 100;         // intervals_summary / intervals_bank
  std::size_t min_interval_length = 3;
  std::vector<intervals::Aggregation> aggregations = intervals::all_aggregations();
  std::size_t sig_depth = 4;
  std::size_t window_depth = 4;
  std::uint64_t seed = 0;
  std::size_t feature_cap = 1000;

  /// Defaults reproducing the reference feature counts for each kind.
  static ExtractorConfig defaults(ExtractorKind kind, std::uint64_t seed = 0);

  /// Output width, known before fitting.
  std::size_t expected_width() const;
  /// Throws InvalidConfig when parameters are out of range or the width exceeds the cap.
  void validate() const;
  /// Stable "key=value;..." text of the parameters that matter for this kind.
  std::string parameters() const;
};

/// An extractor whose state was fitted on a training split.
class FittedExtractor {
 public:
  static FittedExtractor fit(const ExtractorConfig& config, const TimeSeriesDataset& train);
  FeatureMatrix transform(const TimeSeriesDataset& dataset) const;
  const ExtractorConfig& config() const noexcept { return config_; }

  FittedExtractor(FittedExtractor&&) noexcept;
  FittedExtractor& operator=(FittedExtractor&&) noexcept;
  ~FittedExtractor();

 private:
  struct State;
  FittedExtractor(ExtractorConfig config, std::unique_ptr<State> state);
  ExtractorConfig config_;
  std::unique_ptr<State> state_;
};

/// The 22-feature bank over each whole series.
FeatureMatrix featurebank_global_transform(const TimeSeriesDataset& dataset);

struct ExtractResult {
  FeatureMatrix train;
  FeatureMatrix test;
  std::size_t non_finite_replaced = 0;  // over both splits
  double seconds_train = 0.0;           // fit plus train transform
  double seconds_test = 0.0;
};

/// Fits on train only and transforms both splits; non-finite cells become 0.
ExtractResult extract(const ExtractorConfig& config, const SplitPair& pair);

enum class StrategyKind { Raw, Fts, RawPlusFts };

std::string_view to_string(StrategyKind kind) noexcept;
/// Accepts RAW, FTS, RAW+FTS (any case; RAW_PLUS_FTS also accepted).
StrategyKind parse_strategy(std::string_view name);

/// Series values as columns "raw_t<i>".
FeatureMatrix raw_matrix(const TimeSeriesDataset& dataset);

struct Tabular {
  FeatureMatrix train;
  FeatureMatrix test;
};

/// RAW: series only; FTS: features only; RAW+FTS: features then series.
Tabular apply_strategy(StrategyKind strategy, const SplitPair& raw, const FeatureMatrix& train_features,
                       const FeatureMatrix& test_features);

/// Column concatenation of per-extractor outputs, in the given order.
Tabular stack(std::span<const ExtractResult> parts);

/// Top-k configs by score (descending; ties keep pool order). Throws EmptyPool
/// for an empty pool and InvalidConfig for duplicate kinds or k out of range.
std::vector<ExtractorConfig> greedy_stack(std::span<const ExtractorConfig> pool, std::span<const double> scores,
                                          std::size_t k);

/// Mean test accuracy of a 100-tree random forest on each extractor's
/// features alone, over the given splits.
std::vector<double> rank_extractors(std::span<const ExtractorConfig> pool, std::span<const SplitPair> pairs,
                                    std::uint64_t seed);

/// Named extractor stacks shipped in config/presets.json.
std::vector<ExtractorConfig> preset(std::string_view name, std::uint64_t seed = 0);
std::vector<std::string> preset_names();

struct PipelineResult {
  std::string dataset;
  std::vector<std::string> extractors;
  std::string classifier;
  StrategyKind strategy = StrategyKind::Fts;
  double accuracy = 0.0;
  double extract_train_seconds = 0.0;
  double extract_test_seconds = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
  double train_seconds = 0.0;  // extract_train + fit
  std::size_t feature_count = 0;
  std::size_t non_finite_replaced = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> extractor_seeds;

  bool operator==(const PipelineResult&) const = default;
};

/// One JSON object per line with stable field names.
std::string to_json_line(const PipelineResult& result);
PipelineResult result_from_json(std::string_view line);

/// Classifies precomputed features (one ExtractResult per config, ignored for RAW).
PipelineResult run_with_features(const SplitPair& pair, std::span<const ExtractorConfig> configs,
                                 std::span<const ExtractResult> features, const classifiers::ClassifierSpec& spec,
                                 StrategyKind strategy, std::uint64_t seed);

/// Extract, fit, predict and time one cell. RAW skips extraction.
PipelineResult run(const SplitPair& pair, std::span<const ExtractorConfig> configs,
                   const classifiers::ClassifierSpec& spec, StrategyKind strategy, std::uint64_t seed);

}  // namespace tsfc::pipeline
