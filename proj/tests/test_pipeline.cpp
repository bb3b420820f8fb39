#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tsfc/pipeline.hpp"

using namespace tsfc;
using namespace tsfc::pipeline;
using tsfc::testing::error_kind_of;

namespace {

bool is_rocket_family(ExtractorKind k) {
  return k == ExtractorKind::Rocket || k == ExtractorKind::MiniRocket || k == ExtractorKind::MultiRocket;
}

PipelineResult without_timings(PipelineResult r) {
  r.extract_train_seconds = r.extract_test_seconds = r.fit_seconds = r.predict_seconds = r.train_seconds = 0.0;
  return r;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("default widths per extractor") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 128, 1);
    const std::vector<std::pair<ExtractorKind, std::size_t>> expected{
        {ExtractorKind::Rocket, 1000},          {ExtractorKind::MiniRocket, 924},
        {ExtractorKind::MultiRocket, 1008},     {ExtractorKind::IntervalsSummary, 1000},
        {ExtractorKind::IntervalsBank, 990},    {ExtractorKind::FeaturebankGlobal, 22},
        {ExtractorKind::Signature, 930}};
    CHECK(all_extractor_kinds().size() == expected.size());
    for (const auto& [kind, width] : expected) {
      CAPTURE(to_string(kind));
      const auto cfg = ExtractorConfig::defaults(kind, 3);
      CHECK(cfg.expected_width() == width);
      CHECK_NOTHROW(cfg.validate());
      const auto r = extract(cfg, pair);
      CHECK(r.train.cols() == width);
      CHECK(r.test.cols() == width);
      CHECK(r.train.names() == r.test.names());
      CHECK(r.train.rows() == pair.train.size());
      CHECK(r.test.rows() == pair.test.size());
      CHECK(r.train.cols() <= cfg.feature_cap);
      if (kind != ExtractorKind::MultiRocket) CHECK(r.train.cols() <= 1000);
      CHECK(r.seconds_train >= 0.0);
      CHECK(r.seconds_test >= 0.0);
      CHECK(parse_extractor_kind(to_string(kind)) == kind);
    }
    CHECK(error_kind_of([] { parse_extractor_kind("tsfresh"); }) == ErrorKind::InvalidConfig);
  }

  TEST_CASE("config validation and parameter text") {
    auto cfg = ExtractorConfig::defaults(ExtractorKind::Rocket);
    cfg.n_kernels = 600;
    CHECK(error_kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidConfig);
    cfg.feature_cap = 1200;
    CHECK_NOTHROW(cfg.validate());
    const auto a = ExtractorConfig::defaults(ExtractorKind::MiniRocket, 1).parameters();
    const auto b = ExtractorConfig::defaults(ExtractorKind::MiniRocket, 2).parameters();
    CHECK(a != b);
    CHECK(a == ExtractorConfig::defaults(ExtractorKind::MiniRocket, 1).parameters());
  }

  TEST_CASE("fitted state comes from the training split only") {
    const auto pair = synthesize(SynthKind::BumpLocation, 12, 64, 2);
    const auto other = synthesize(SynthKind::NoiseOnly, 12, 64, 77);
    for (const auto kind : all_extractor_kinds()) {
      CAPTURE(to_string(kind));
      const auto cfg = ExtractorConfig::defaults(kind, 5);
      const auto a = extract(cfg, pair);
      const auto b = extract(cfg, SplitPair{pair.train, other.test});
      CHECK(a.train == b.train);
      const auto fitted = FittedExtractor::fit(cfg, pair.train);
      CHECK(fitted.transform(other.test) == b.test);
      CHECK(fitted.transform(pair.test) == a.test);
    }
  }

  TEST_CASE("non-finite features are replaced and counted") {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 6; ++i) {
      std::vector<double> r(32);
      for (std::size_t t = 0; t < r.size(); ++t) r[t] = (t + static_cast<std::size_t>(i)) % 2 ? 1.7e308 : -1.7e308;
      rows.push_back(r);
      labels.push_back(i % 2 ? "a" : "b");
    }
    const auto train = testing::make_dataset(rows, labels);
    const auto test = testing::make_dataset(rows, labels, Split::Test);
    const auto r = extract(ExtractorConfig::defaults(ExtractorKind::Rocket, 1), SplitPair{train, test});
    CHECK(r.train.cols() == 1000);
    CHECK(r.non_finite_replaced > 0);
    for (const double v : r.train.values()) CHECK(std::isfinite(v));
    for (const double v : r.test.values()) CHECK(std::isfinite(v));

    auto m = testing::make_matrix(1, 3, {1.0, std::nan(""), -INFINITY});
    CHECK(m.replace_non_finite() == 2);
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(0, 2) == 0.0);
  }

  TEST_CASE("strategy widths and column order") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 64, 3);
    const auto f = extract(ExtractorConfig::defaults(ExtractorKind::MiniRocket, 1), pair);
    const auto raw = apply_strategy(StrategyKind::Raw, pair, f.train, f.test);
    const auto fts = apply_strategy(StrategyKind::Fts, pair, f.train, f.test);
    const auto both = apply_strategy(StrategyKind::RawPlusFts, pair, f.train, f.test);
    CHECK(raw.train.cols() == 64);
    CHECK(fts.train.cols() == 924);
    CHECK(both.train.cols() == 988);
    CHECK(both.test.cols() == 988);
    CHECK(fts.train == f.train);
    CHECK(both.train.names()[0] == f.train.names()[0]);
    CHECK(both.train.names()[924] == "raw_t0");
    for (std::size_t r = 0; r < pair.train.size(); ++r) {
      CHECK(both.train.at(r, 924 + 5) == pair.train.row(r)[5]);
      CHECK(raw.train.at(r, 63) == pair.train.row(r)[63]);
    }
    const auto short_features = testing::make_matrix(1, 1, {0.0});
    CHECK(error_kind_of([&] { apply_strategy(StrategyKind::Fts, pair, short_features, f.test); }) ==
          ErrorKind::RowMismatch);
    CHECK(parse_strategy("raw+fts") == StrategyKind::RawPlusFts);
    CHECK(parse_strategy("RAW_PLUS_FTS") == StrategyKind::RawPlusFts);
    CHECK(to_string(StrategyKind::RawPlusFts) == "RAW+FTS");
  }

  TEST_CASE("stacking and greedy selection") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 64, 4);
    const std::vector<ExtractorConfig> pool{ExtractorConfig::defaults(ExtractorKind::FeaturebankGlobal, 1),
                                            ExtractorConfig::defaults(ExtractorKind::MiniRocket, 1),
                                            ExtractorConfig::defaults(ExtractorKind::Signature, 1)};
    const std::vector<double> scores{0.7, 0.9, 0.7};
    const auto top1 = greedy_stack(pool, scores, 1);
    REQUIRE(top1.size() == 1);
    CHECK(top1[0].kind == ExtractorKind::MiniRocket);
    const auto all = greedy_stack(pool, scores, 3);
    CHECK(all[0].kind == ExtractorKind::MiniRocket);
    CHECK(all[1].kind == ExtractorKind::FeaturebankGlobal);
    CHECK(all[2].kind == ExtractorKind::Signature);

    std::vector<ExtractResult> parts;
    std::size_t width = 0;
    for (const auto& c : all) {
      parts.push_back(extract(c, pair));
      width += parts.back().train.cols();
    }
    const auto stacked = stack(parts);
    CHECK(stacked.train.cols() == width);
    CHECK(stacked.train.cols() == 924 + 22 + 930);
    CHECK(stacked.train.rows() == pair.train.size());
    for (std::size_t r = 0; r < stacked.train.rows(); ++r) CHECK(stacked.train.at(r, 924) == parts[1].train.at(r, 0));

    CHECK(error_kind_of([] { greedy_stack({}, {}, 1); }) == ErrorKind::EmptyPool);
    CHECK(error_kind_of([] { stack({}); }) == ErrorKind::EmptyPool);
    CHECK(error_kind_of([&] { greedy_stack(pool, scores, 0); }) == ErrorKind::InvalidConfig);
    CHECK(error_kind_of([&] { greedy_stack(pool, scores, 4); }) == ErrorKind::InvalidConfig);
    const std::vector<ExtractorConfig> dup{pool[0], pool[0]};
    CHECK(error_kind_of([&] { greedy_stack(dup, std::vector<double>{0.1, 0.2}, 1); }) == ErrorKind::InvalidConfig);
  }

  TEST_CASE("rank extractors gives one accuracy per config") {
    const std::vector<SplitPair> pairs{synthesize(SynthKind::FreqTwoClass, 10, 32, 1)};
    const std::vector<ExtractorConfig> pool{ExtractorConfig::defaults(ExtractorKind::FeaturebankGlobal, 1),
                                            ExtractorConfig::defaults(ExtractorKind::IntervalsSummary, 1)};
    const auto scores = rank_extractors(pool, pairs, 1);
    REQUIRE(scores.size() == 2);
    for (const double s : scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(scores == rank_extractors(pool, pairs, 1));
  }

  TEST_CASE("presets") {
    const auto names = preset_names();
    CHECK(std::find(names.begin(), names.end(), "Features") != names.end());
    CHECK(std::find(names.begin(), names.end(), "Features_noROCKET") != names.end());
    CHECK(std::find(names.begin(), names.end(), "Features_python-analog") != names.end());
    const auto full = preset("Features", 1);
    const auto no_rocket = preset("Features_noROCKET", 1);
    CHECK(std::any_of(full.begin(), full.end(), [](const auto& c) { return c.kind == ExtractorKind::MiniRocket; }));
    CHECK(std::none_of(no_rocket.begin(), no_rocket.end(), [](const auto& c) { return is_rocket_family(c.kind); }));
    for (const auto* p : {&full, &no_rocket})
      CHECK(std::none_of(p->begin(), p->end(), [](const auto& c) { return c.kind == ExtractorKind::FeaturebankGlobal; }));
    const auto again = preset("Features", 1);
    REQUIRE(again.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) CHECK(again[i].parameters() == full[i].parameters());
    CHECK(error_kind_of([] { preset("Features_all"); }) == ErrorKind::UnknownPreset);
  }

  TEST_CASE("run records timings, widths and seeds") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 20, 64, 6);
    const std::vector<ExtractorConfig> configs{ExtractorConfig::defaults(ExtractorKind::MiniRocket, 2)};
    const auto spec = classifiers::parse_classifier("rf20");
    const auto r = run(pair, configs, spec, StrategyKind::RawPlusFts, 9);
    CHECK(r.feature_count == 988);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.train_seconds == r.extract_train_seconds + r.fit_seconds);
    for (const double t : {r.extract_train_seconds, r.extract_test_seconds, r.fit_seconds, r.predict_seconds})
      CHECK(t >= 0.0);
    CHECK(r.classifier == "rf20");
    CHECK(r.strategy == StrategyKind::RawPlusFts);
    CHECK(r.extractor_seeds == std::vector<std::uint64_t>{2});
    CHECK(without_timings(run(pair, configs, spec, StrategyKind::RawPlusFts, 9)) == without_timings(r));

    const auto raw = run(pair, configs, spec, StrategyKind::Raw, 9);
    CHECK(raw.feature_count == 64);
    CHECK(raw.extract_train_seconds == 0.0);

    CHECK(result_from_json(to_json_line(r)) == r);
    CHECK(to_json_line(r).find('\n') == std::string::npos);
  }
}
