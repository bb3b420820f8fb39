#include "tsfc/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <numeric>
#include <set>
#include <variant>

#include "presets_data.hpp"
#include "tsfc/error.hpp"
#include "tsfc/featurebank.hpp"
#include "tsfc/kernels.hpp"
#include "tsfc/random.hpp"
#include "tsfc/signature.hpp"

namespace tsfc::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

struct IntervalState {
  intervals::IntervalSet set;
  bool bank = false;
};
struct GlobalBankState {};
struct SignatureState {};

}  // namespace

struct FittedExtractor::State {
  std::variant<kernels::Rocket, kernels::MiniRocket, kernels::MultiRocket, IntervalState, GlobalBankState,
               SignatureState>
      model;
};

std::string_view to_string(ExtractorKind kind) noexcept {
  switch (kind) {
    case ExtractorKind::Rocket: return "rocket";
    case ExtractorKind::MiniRocket: return "minirocket";
    case ExtractorKind::MultiRocket: return "multirocket";
    case ExtractorKind::IntervalsSummary: return "intervals_summary";
    case ExtractorKind::IntervalsBank: return "intervals_bank";
    case ExtractorKind::FeaturebankGlobal: return "featurebank_global";
    case ExtractorKind::Signature: return "signature";
  }
  return "unknown";
}

const std::vector<ExtractorKind>& all_extractor_kinds() {
  static const std::vector<ExtractorKind> kinds{
      ExtractorKind::Rocket,        ExtractorKind::MiniRocket,        ExtractorKind::MultiRocket,
      ExtractorKind::IntervalsSummary, ExtractorKind::IntervalsBank, ExtractorKind::FeaturebankGlobal,
      ExtractorKind::Signature};
  return kinds;
}

ExtractorKind parse_extractor_kind(std::string_view name) {
  const auto key = lower(name);
  for (const auto k : all_extractor_kinds()) {
    if (to_string(k) == key) return k;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown extractor '" + std::string(name) + "'");
}

ExtractorConfig ExtractorConfig::defaults(ExtractorKind kind, std::uint64_t seed) {
  ExtractorConfig c;
  c.kind = kind;
  c.seed = seed;
  if (kind == ExtractorKind::IntervalsBank) c.n_intervals = 45;
  // 84 patterns x 2 representations x 6 pooling operators cannot land on 1000
  if (kind == ExtractorKind::MultiRocket) c.feature_cap = 1008;
  return c;
}

std::size_t ExtractorConfig::expected_width() const {
  switch (kind) {
    case ExtractorKind::Rocket: return 2 * n_kernels;
    case ExtractorKind::MiniRocket:
      return kernels::FixedKernelBank::kPatterns * (feature_budget / kernels::FixedKernelBank::kPatterns);
    case ExtractorKind::MultiRocket:
      return 2 * kernels::FixedKernelBank::kPatterns *
             (n_kernel_instances / kernels::FixedKernelBank::kPatterns) * features_per_kernel;
    case ExtractorKind::IntervalsSummary: return n_intervals * aggregations.size();
    case ExtractorKind::IntervalsBank: return n_intervals * featurebank::kFeatureCount;
    case ExtractorKind::FeaturebankGlobal: return featurebank::kFeatureCount;
    case ExtractorKind::Signature:
      return ((std::size_t{2} << window_depth) - 1) * signature::TensorSignature::term_count(2, sig_depth);
  }
  return 0;
}

void ExtractorConfig::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::InvalidConfig, std::string(to_string(kind)) + ": " + why);
  };
  switch (kind) {
    case ExtractorKind::Rocket:
      if (n_kernels == 0) fail("n_kernels must be positive");
      break;
    case ExtractorKind::MiniRocket:
      if (feature_budget < kernels::FixedKernelBank::kPatterns) fail("feature budget below 84");
      break;
    case ExtractorKind::MultiRocket:
      if (n_kernel_instances < kernels::FixedKernelBank::kPatterns) fail("n_kernel_instances below 84");
      if (features_per_kernel != 4 && features_per_kernel != 6) fail("features_per_kernel must be 4 or 6");
      break;
    case ExtractorKind::IntervalsSummary:
      if (aggregations.empty()) fail("no aggregations");
      [[fallthrough]];
    case ExtractorKind::IntervalsBank:
      if (n_intervals == 0) fail("n_intervals must be positive");
      if (min_interval_length < featurebank::kMinWindow) fail("min_interval_length below 3");
      break;
    case ExtractorKind::FeaturebankGlobal: break;
    case ExtractorKind::Signature:
      if (sig_depth == 0) fail("signature depth must be positive");
      if (window_depth > 10) fail("window depth above 10");
      break;
  }
  if (expected_width() > feature_cap) {
    fail("width " + std::to_string(expected_width()) + " exceeds the feature cap " + std::to_string(feature_cap));
  }
}

std::string ExtractorConfig::parameters() const {
  std::string p;
  switch (kind) {
    case ExtractorKind::Rocket: p = "n_kernels=" + std::to_string(n_kernels); break;
    case ExtractorKind::MiniRocket: p = "feature_budget=" + std::to_string(feature_budget); break;
    case ExtractorKind::MultiRocket:
      p = "n_kernel_instances=" + std::to_string(n_kernel_instances) +
          ";features_per_kernel=" + std::to_string(features_per_kernel);
      break;
    case ExtractorKind::IntervalsSummary: {
      p = "n_intervals=" + std::to_string(n_intervals) + ";min_length=" + std::to_string(min_interval_length) +
          ";aggregations=";
      for (std::size_t i = 0; i < aggregations.size(); ++i) {
        if (i) p += ',';
        p += intervals::to_string(aggregations[i]);
      }
      break;
    }
    case ExtractorKind::IntervalsBank:
      p = "n_intervals=" + std::to_string(n_intervals) + ";min_length=" + std::to_string(min_interval_length);
      break;
    case ExtractorKind::FeaturebankGlobal: p = ""; break;
    case ExtractorKind::Signature:
      p = "sig_depth=" + std::to_string(sig_depth) + ";window_depth=" + std::to_string(window_depth);
      break;
  }
  return p + (p.empty() ? "" : ";") + "seed=" + std::to_string(seed) + ";cap=" + std::to_string(feature_cap);
}

FittedExtractor::FittedExtractor(ExtractorConfig config, std::unique_ptr<State> state)
    : config_(std::move(config)), state_(std::move(state)) {}
FittedExtractor::FittedExtractor(FittedExtractor&&) noexcept = default;
FittedExtractor& FittedExtractor::operator=(FittedExtractor&&) noexcept = default;
FittedExtractor::~FittedExtractor() = default;

FittedExtractor FittedExtractor::fit(const ExtractorConfig& config, const TimeSeriesDataset& train) {
  config.validate();
  auto state = std::make_unique<State>();
  switch (config.kind) {
    case ExtractorKind::Rocket:
      state->model = kernels::Rocket::fit(train.length(), config.n_kernels, config.seed);
      break;
    case ExtractorKind::MiniRocket:
      state->model = kernels::MiniRocket::fit(train, config.feature_budget, config.seed);
      break;
    case ExtractorKind::MultiRocket:
      state->model =
          kernels::MultiRocket::fit(train, config.n_kernel_instances, config.features_per_kernel, config.seed);
      break;
    case ExtractorKind::IntervalsSummary:
    case ExtractorKind::IntervalsBank:
      state->model = IntervalState{
          intervals::sample_intervals(train.length(), config.n_intervals, config.seed, config.min_interval_length),
          config.kind == ExtractorKind::IntervalsBank};
      break;
    case ExtractorKind::FeaturebankGlobal:
      if (train.length() < featurebank::kMinWindow) {
        throw Error(ErrorKind::SeriesTooShort, "the feature bank needs series of length >= 3");
      }
      state->model = GlobalBankState{};
      break;
    case ExtractorKind::Signature:
      // windows are fixed by the length; check it now so fit fails rather than transform
      signature::dyadic_windows(train.length(), config.window_depth);
      state->model = SignatureState{};
      break;
  }
  return FittedExtractor(config, std::move(state));
}

FeatureMatrix FittedExtractor::transform(const TimeSeriesDataset& dataset) const {
  return std::visit(
      [&](const auto& m) -> FeatureMatrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IntervalState>) {
          if (dataset.length() != m.set.series_length) {
            throw Error(ErrorKind::DimensionMismatch, "series length differs from the fitted length");
          }
          return m.bank ? intervals::interval_bank_transform(dataset, m.set)
                        : intervals::interval_summary_transform(dataset, m.set, config_.aggregations);
        } else if constexpr (std::is_same_v<T, GlobalBankState>) {
          return featurebank_global_transform(dataset);
        } else if constexpr (std::is_same_v<T, SignatureState>) {
          return signature::signature_transform(dataset, config_.sig_depth, config_.window_depth);
        } else {
          return m.transform(dataset);
        }
      },
      state_->model);
}

FeatureMatrix featurebank_global_transform(const TimeSeriesDataset& dataset) {
  std::vector<std::string> names;
  for (const auto n : featurebank::feature_names()) names.push_back("fbg_" + std::string(n));
  FeatureMatrix out(dataset.size(), std::move(names), ColumnProvenance{"featurebank_global", ""});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto f = featurebank::compute_bank(dataset.row(i));
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

ExtractResult extract(const ExtractorConfig& config, const SplitPair& pair) {
  ExtractResult r;
  auto start = Clock::now();
  const auto fitted = FittedExtractor::fit(config, pair.train);
  r.train = fitted.transform(pair.train);
  r.seconds_train = seconds_since(start);
  start = Clock::now();
  r.test = fitted.transform(pair.test);
  r.seconds_test = seconds_since(start);
  r.non_finite_replaced = r.train.replace_non_finite() + r.test.replace_non_finite();
  return r;
}

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Raw: return "RAW";
    case StrategyKind::Fts: return "FTS";
    case StrategyKind::RawPlusFts: return "RAW+FTS";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  const auto key = lower(name);
  if (key == "raw") return StrategyKind::Raw;
  if (key == "fts") return StrategyKind::Fts;
  if (key == "raw+fts" || key == "raw_plus_fts") return StrategyKind::RawPlusFts;
  throw Error(ErrorKind::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

FeatureMatrix raw_matrix(const TimeSeriesDataset& dataset) {
  std::vector<std::string> names;
  names.reserve(dataset.length());
  for (std::size_t t = 0; t < dataset.length(); ++t) names.push_back("raw_t" + std::to_string(t));
  std::vector<double> values(dataset.values().begin(), dataset.values().end());
  return {dataset.size(), std::move(names),
          std::vector<ColumnProvenance>(dataset.length(), ColumnProvenance{"raw", ""}), std::move(values)};
}

Tabular apply_strategy(StrategyKind strategy, const SplitPair& raw, const FeatureMatrix& train_features,
                       const FeatureMatrix& test_features) {
  if (strategy == StrategyKind::Raw) return {raw_matrix(raw.train), raw_matrix(raw.test)};
  if (train_features.rows() != raw.train.size() || test_features.rows() != raw.test.size()) {
    throw Error(ErrorKind::RowMismatch, "feature rows differ from the split sizes");
  }
  if (train_features.names() != test_features.names()) {
    throw Error(ErrorKind::WidthMismatch, "train and test feature schemas differ");
  }
  if (strategy == StrategyKind::Fts) return {train_features, test_features};
  const std::array<FeatureMatrix, 2> tr{train_features, raw_matrix(raw.train)};
  const std::array<FeatureMatrix, 2> te{test_features, raw_matrix(raw.test)};
  return {hconcat(tr), hconcat(te)};
}

Tabular stack(std::span<const ExtractResult> parts) {
  if (parts.empty()) throw Error(ErrorKind::EmptyPool, "nothing to stack");
  std::vector<FeatureMatrix> tr, te;
  for (const auto& p : parts) {
    tr.push_back(p.train);
    te.push_back(p.test);
  }
  return {hconcat(tr), hconcat(te)};
}

std::vector<ExtractorConfig> greedy_stack(std::span<const ExtractorConfig> pool, std::span<const double> scores,
                                          std::size_t k) {
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "extractor pool is empty");
  if (scores.size() != pool.size()) throw Error(ErrorKind::InvalidSize, "one score per pool entry expected");
  std::set<ExtractorKind> seen;
  for (const auto& c : pool) {
    if (!seen.insert(c.kind).second) {
      throw Error(ErrorKind::InvalidConfig, "extractor '" + std::string(to_string(c.kind)) + "' appears twice");
    }
  }
  if (k == 0 || k > pool.size()) {
    throw Error(ErrorKind::InvalidConfig, "stack size must be in 1.." + std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<ExtractorConfig> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[order[i]]);
  return out;
}

std::vector<double> rank_extractors(std::span<const ExtractorConfig> pool, std::span<const SplitPair> pairs,
                                    std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "extractor pool is empty");
  if (pairs.empty()) throw Error(ErrorKind::InvalidSize, "ranking needs at least one split");
  const auto spec = classifiers::parse_classifier("rf100");
  std::vector<double> scores;
  for (const auto& config : pool) {
    double total = 0.0;
    for (const auto& pair : pairs) {
      const ExtractorConfig one[] = {config};
      total += run(pair, one, spec, StrategyKind::Fts, seed).accuracy;
    }
    scores.push_back(total / static_cast<double>(pairs.size()));
  }
  return scores;
}

namespace {

const nlohmann::json& presets_table() {
  static const auto table = nlohmann::json::parse(detail::kPresetsJson);
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : presets_table().items()) out.push_back(name);
  return out;
}

std::vector<ExtractorConfig> preset(std::string_view name, std::uint64_t seed) {
  const auto& table = presets_table();
  const auto it = table.find(std::string(name));
  if (it == table.end()) throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
  std::vector<ExtractorConfig> out;
  for (const auto& entry : *it) {
    const auto kind = parse_extractor_kind(entry.get<std::string>());
    out.push_back(ExtractorConfig::defaults(kind, derive_seed(seed, static_cast<std::uint64_t>(kind))));
  }
  return out;
}

std::string to_json_line(const PipelineResult& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["extractors"] = r.extractors;
  j["classifier"] = r.classifier;
  j["strategy"] = std::string(to_string(r.strategy));
  j["accuracy"] = r.accuracy;
  j["extract_train_seconds"] = r.extract_train_seconds;
  j["extract_test_seconds"] = r.extract_test_seconds;
  j["fit_seconds"] = r.fit_seconds;
  j["predict_seconds"] = r.predict_seconds;
  j["train_seconds"] = r.train_seconds;
  j["feature_count"] = r.feature_count;
  j["non_finite_replaced"] = r.non_finite_replaced;
  j["seed"] = r.seed;
  j["extractor_seeds"] = r.extractor_seeds;
  return j.dump();
}

PipelineResult result_from_json(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("bad result record: ") + e.what());
  }
  PipelineResult r;
  try {
    r.dataset = j.at("dataset").get<std::string>();
    r.extractors = j.at("extractors").get<std::vector<std::string>>();
    r.classifier = j.at("classifier").get<std::string>();
    r.strategy = parse_strategy(j.at("strategy").get<std::string>());
    r.accuracy = j.at("accuracy").get<double>();
    r.extract_train_seconds = j.at("extract_train_seconds").get<double>();
    r.extract_test_seconds = j.at("extract_test_seconds").get<double>();
    r.fit_seconds = j.at("fit_seconds").get<double>();
    r.predict_seconds = j.at("predict_seconds").get<double>();
    r.train_seconds = j.at("train_seconds").get<double>();
    r.feature_count = j.at("feature_count").get<std::size_t>();
    r.non_finite_replaced = j.at("non_finite_replaced").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.extractor_seeds = j.at("extractor_seeds").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("incomplete result record: ") + e.what());
  }
  return r;
}

PipelineResult run_with_features(const SplitPair& pair, std::span<const ExtractorConfig> configs,
                                 std::span<const ExtractResult> features, const classifiers::ClassifierSpec& spec,
                                 StrategyKind strategy, std::uint64_t seed) {
  PipelineResult r;
  r.dataset = pair.name();
  r.classifier = spec.name();
  r.strategy = strategy;
  r.seed = seed;
  for (const auto& c : configs) {
    r.extractors.emplace_back(to_string(c.kind));
    r.extractor_seeds.push_back(c.seed);
  }

  Tabular tab;
  if (strategy == StrategyKind::Raw) {
    tab = apply_strategy(strategy, pair, {}, {});
  } else {
    if (features.size() != configs.size() || features.empty()) {
      throw Error(ErrorKind::InvalidSize, "one extraction result per extractor expected");
    }
    for (const auto& f : features) {
      r.extract_train_seconds += f.seconds_train;
      r.extract_test_seconds += f.seconds_test;
      r.non_finite_replaced += f.non_finite_replaced;
    }
    const auto stacked = stack(features);
    tab = apply_strategy(strategy, pair, stacked.train, stacked.test);
  }
  r.feature_count = tab.train.cols();

  auto start = Clock::now();
  const auto model = classifiers::fit(spec, tab.train, pair.train.labels(), seed);
  r.fit_seconds = seconds_since(start);
  start = Clock::now();
  const auto predicted = model.predict(tab.test);
  r.predict_seconds = seconds_since(start);
  r.accuracy = classifiers::accuracy(predicted, pair.test.labels());
  r.train_seconds = r.extract_train_seconds + r.fit_seconds;
  return r;
}

PipelineResult run(const SplitPair& pair, std::span<const ExtractorConfig> configs,
                   const classifiers::ClassifierSpec& spec, StrategyKind strategy, std::uint64_t seed) {
  std::vector<ExtractResult> features;
  if (strategy != StrategyKind::Raw) {
    for (const auto& c : configs) features.push_back(extract(c, pair));
  }
  return run_with_features(pair, configs, features, spec, strategy, seed);
}

}  // namespace tsfc::pipeline
