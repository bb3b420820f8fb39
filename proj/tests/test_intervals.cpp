#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "tsfc/featurebank.hpp"
#include "tsfc/intervals.hpp"

using namespace tsfc;
using namespace tsfc::intervals;
using tsfc::testing::error_kind_of;

TEST_SUITE("intervals") {
  TEST_CASE("sampling is deterministic and respects the minimum length") {
    CHECK(sample_intervals(10, 3, 1) == sample_intervals(10, 3, 1));
    const auto forced = sample_intervals(3, 5, 9);
    for (const auto& iv : forced.intervals) CHECK(iv == Interval{0, 3});
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto set = sample_intervals(50, 40, seed, 5);
      CHECK(set.intervals.size() == 40);
      for (const auto& iv : set.intervals) {
        CHECK(iv.length() >= 5);
        CHECK(iv.end <= 50);
      }
    }
    CHECK(error_kind_of([] { sample_intervals(2, 1, 0); }) == ErrorKind::SeriesTooShort);
  }

  TEST_CASE("aggregations on a hand example") {
    const std::vector<double> x{1, 2, 3};
    CHECK(aggregate(x, Aggregation::Mean) == 2.0);
    CHECK(aggregate(x, Aggregation::Sum) == 6.0);
    CHECK(aggregate(x, Aggregation::Count) == 3.0);
    CHECK(aggregate(x, Aggregation::Median) == 2.0);
    CHECK(aggregate(x, Aggregation::Q25) == 1.5);
    CHECK(aggregate(x, Aggregation::Skew) == doctest::Approx(0.0));
    CHECK(aggregate(std::vector<double>{4, 4, 4}, Aggregation::Std) == 0.0);
    CHECK(parse_aggregation("quant75") == Aggregation::Q75);
    CHECK(all_aggregations().size() == 10);
  }

  TEST_CASE("summary transform widths and identities") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 64, 2);
    const auto set = sample_intervals(64, 100, 5);
    const auto f = interval_summary_transform(pair.train, set, all_aggregations());
    CHECK(f.cols() == 1000);
    for (std::size_t k = 0; k < 100; ++k) {
      const std::size_t base = k * 10;
      const double len = static_cast<double>(set.intervals[k].length());
      for (std::size_t r = 0; r < f.rows(); ++r) {
        CHECK(f.at(r, base + 6) == len);
        CHECK(f.at(r, base + 3) == doctest::Approx(f.at(r, base + 0) * len).epsilon(1e-12));
      }
    }
    const auto ramp = testing::make_dataset({{1, 2, 3, 4, 5, 6}}, {"a"});
    const IntervalSet first{{{0, 3}}, 6, 0};
    CHECK(interval_summary_transform(ramp, first, all_aggregations()).at(0, 0) == 2.0);
    const std::vector<Aggregation> two{Aggregation::Max, Aggregation::Min};
    const auto g = interval_summary_transform(ramp, first, two);
    CHECK(g.cols() == 2);
    CHECK(g.at(0, 0) == 3.0);
    CHECK(g.at(0, 1) == 1.0);
  }

  TEST_CASE("bank transform widths, constant series and duplicate intervals") {
    const auto pair = synthesize(SynthKind::BumpLocation, 10, 64, 2);
    CHECK(interval_bank_transform(pair.train, sample_intervals(64, 45, 1)).cols() == 990);

    const auto flat = testing::make_dataset({std::vector<double>(20, 3.0), std::vector<double>(20, -1.0)}, {"a", "b"});
    const auto flat_f = interval_bank_transform(flat, sample_intervals(20, 12, 4));
    for (std::size_t k = 0; k < 12; ++k)
      for (std::size_t r = 0; r < 2; ++r) CHECK(flat_f.at(r, k * featurebank::kFeatureCount + 1) == 0.0);

    const IntervalSet dup{{{3, 20}, {3, 20}}, 64, 0};
    const auto d = interval_bank_transform(pair.train, dup);
    for (std::size_t r = 0; r < d.rows(); ++r)
      for (std::size_t c = 0; c < featurebank::kFeatureCount; ++c)
        CHECK(d.at(r, c) == d.at(r, c + featurebank::kFeatureCount));
  }

  TEST_CASE("nested intervals on monotone series order min and max by containment") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> x(40);
      double level = rng.normal();
      for (auto& v : x) v = level += std::abs(rng.normal());
      const auto ds = testing::make_dataset({x}, {"a"});
      const auto outer_start = static_cast<std::size_t>(rng.uniform_int(0, 10));
      const auto outer_end = static_cast<std::size_t>(rng.uniform_int(30, 40));
      const auto inner_start = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(outer_start), 15));
      const auto inner_end = static_cast<std::size_t>(rng.uniform_int(20, static_cast<std::int64_t>(outer_end)));
      const IntervalSet set{{{outer_start, outer_end}, {inner_start, inner_end}}, 40, 0};
      const std::vector<Aggregation> agg{Aggregation::Min, Aggregation::Max};
      const auto f = interval_summary_transform(ds, set, agg);
      CHECK(f.at(0, 0) <= f.at(0, 2));
      CHECK(f.at(0, 1) >= f.at(0, 3));
    }
  }

  TEST_CASE("shuffling rows permutes feature rows") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 12, 48, 6);
    const auto set = sample_intervals(48, 20, 3);
    std::vector<std::size_t> perm(pair.train.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(2);
    rng.shuffle(perm);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (const auto i : perm) {
      const auto r = pair.train.row(i);
      rows.emplace_back(r.begin(), r.end());
      labels.push_back(pair.train.labels()[i]);
    }
    const auto shuffled = testing::make_dataset(rows, labels);
    const auto a = interval_summary_transform(pair.train, set, all_aggregations());
    const auto b = interval_summary_transform(shuffled, set, all_aggregations());
    const auto c = interval_bank_transform(pair.train, set);
    const auto d = interval_bank_transform(shuffled, set);
    for (std::size_t k = 0; k < perm.size(); ++k) {
      CHECK(std::equal(a.row(perm[k]).begin(), a.row(perm[k]).end(), b.row(k).begin()));
      CHECK(std::equal(c.row(perm[k]).begin(), c.row(perm[k]).end(), d.row(k).begin()));
    }
  }
}
