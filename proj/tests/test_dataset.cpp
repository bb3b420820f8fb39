#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "tsfc/dataset.hpp"

using namespace tsfc;
using tsfc::testing::error_kind_of;

namespace {

const char* kHeader = "@problemName toy\n@timeStamps false\n@univariate true\n@classLabel true a b\n@data\n";

std::string ts(const std::string& records) { return std::string(kHeader) + records; }

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("minimal ts file parses") {
    const auto d = parse_ts(ts("1.0,2.0,3.0:a\n4.0,5.0,6.0:b"));
    CHECK(d.size() == 2);
    CHECK(d.length() == 3);
    CHECK(d.name() == "toy");
    CHECK(d.labels() == std::vector<std::string>{"a", "b"});
    CHECK(d.row(1)[2] == 6.0);
  }

  TEST_CASE("ts ingestion errors") {
    CHECK(error_kind_of([] { parse_ts(ts("1.0,2.0,3.0:a\n1.0,2.0:a")); }) == ErrorKind::UnequalLength);
    CHECK(error_kind_of([] { parse_ts(ts("1.0,?,3.0:a")); }) == ErrorKind::MissingValue);
    CHECK(error_kind_of([] { parse_ts(ts("1.0,,3.0:a")); }) == ErrorKind::MissingValue);
    CHECK(error_kind_of([] { parse_ts(ts("1.0,2.0,3.0:c")); }) == ErrorKind::UnknownLabel);
    CHECK(error_kind_of([] { parse_ts("@problemName x\n@data\n1,2:a"); }) == ErrorKind::MalformedHeader);
    CHECK(error_kind_of([] { parse_ts("@problemName x\n@classLabel true a\n"); }) == ErrorKind::MalformedHeader);
    CHECK(error_kind_of([] { parse_ts(ts("1,2:a:b")); }) == ErrorKind::MalformedHeader);
    CHECK(error_kind_of([] { parse_ts("@timeStamps true\n@classLabel true a\n@data\n1,2:a"); }) ==
          ErrorKind::MalformedHeader);
    CHECK(error_kind_of([] { parse_ts("@seriesLength 4\n@classLabel true a\n@data\n1,2,3:a"); }) ==
          ErrorKind::UnequalLength);
  }

  TEST_CASE("crlf line endings are accepted") {
    const auto d = parse_ts("@problemName w\r\n@classLabel true x y\r\n@data\r\n1,2:x\r\n3,4:y\r\n");
    CHECK(d.size() == 2);
    CHECK(d.labels()[1] == "y");
  }

  TEST_CASE("csv parsing") {
    const auto d = parse_csv("a,1,2,3");
    CHECK(d.size() == 1);
    CHECK(d.length() == 3);
    CHECK(error_kind_of([] { parse_csv(""); }) == ErrorKind::MalformedHeader);
    CHECK(error_kind_of([] { parse_csv("a,1,x,3"); }) == ErrorKind::MissingValue);
    CHECK(error_kind_of([] { parse_csv("a,1,2,3\nb,1,2"); }) == ErrorKind::UnequalLength);
  }

  TEST_CASE("construction rejects non-finite values and short series") {
    CHECK(error_kind_of([] {
            TimeSeriesDataset("x", 2, {1.0, std::nan("")}, {"a"}, Split::Train);
          }) == ErrorKind::MissingValue);
    CHECK(error_kind_of([] { TimeSeriesDataset("x", 1, {1.0}, {"a"}, Split::Train); }) == ErrorKind::InvalidSize);
  }

  TEST_CASE("serialize then parse round-trips for random datasets") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto n = static_cast<std::size_t>(rng.uniform_int(1, 8));
      const auto m = static_cast<std::size_t>(rng.uniform_int(2, 30));
      std::vector<double> values;
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < n * m; ++i) values.push_back(rng.normal() * std::pow(10.0, rng.uniform(-8, 8)));
      for (std::size_t i = 0; i < n; ++i) labels.push_back("c" + std::to_string(rng.uniform_int(0, 3)));
      const TimeSeriesDataset d("rt" + std::to_string(seed), m, values, labels, Split::Train);
      CHECK(parse_ts(serialize_ts(d)) == d);
      CHECK(parse_csv(serialize_csv(d), d.name()) == d);
    }
  }

  TEST_CASE("split pair validation") {
    const auto train = testing::make_dataset({{1, 2, 3}, {4, 5, 6}}, {"a", "b"});
    const auto test_ok = testing::make_dataset({{1, 2, 3}}, {"a"}, Split::Test);
    const auto test_short = testing::make_dataset({{1, 2}}, {"a"}, Split::Test);
    const auto test_label = testing::make_dataset({{1, 2, 3}}, {"z"}, Split::Test);
    CHECK_NOTHROW(validate(SplitPair{train, test_ok}));
    CHECK(error_kind_of([&] { validate(SplitPair{train, test_short}); }) == ErrorKind::UnequalLength);
    CHECK(error_kind_of([&] { validate(SplitPair{train, test_label}); }) == ErrorKind::UnknownLabel);
  }

  TEST_CASE("load split pair from a directory") {
    const auto root = std::filesystem::temp_directory_path() / "tsfc_dataset_test";
    std::filesystem::remove_all(root);
    const auto pair = synthesize(SynthKind::BumpLocation, 6, 32, 4);
    std::filesystem::create_directories(root / pair.name());
    std::ofstream(root / pair.name() / (pair.name() + "_TRAIN.ts")) << serialize_ts(pair.train);
    std::ofstream(root / pair.name() / (pair.name() + "_TEST.csv")) << serialize_csv(pair.test);
    const auto loaded = load_split_pair(root, pair.name());
    CHECK(loaded.train == pair.train);
    CHECK(loaded.test.values().size() == pair.test.values().size());
    CHECK(loaded.test.labels() == pair.test.labels());
    CHECK(error_kind_of([&] { load_split_pair(root, "absent"); }) == ErrorKind::Io);
    std::filesystem::remove_all(root);
  }

  TEST_CASE("synthesize is deterministic and balanced") {
    const auto a = synthesize(SynthKind::FreqTwoClass, 40, 64, 7);
    const auto b = synthesize(SynthKind::FreqTwoClass, 40, 64, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    const auto c = synthesize(SynthKind::FreqTwoClass, 40, 64, 8);
    CHECK_FALSE(a.train == c.train);
    for (const auto* d : {&a.train, &a.test}) {
      const auto& labels = d->labels();
      CHECK(std::count(labels.begin(), labels.end(), d->classes()[0]) == 20);
      CHECK(d->classes().size() == 2);
    }
    CHECK(error_kind_of([] { synthesize(SynthKind::NoiseOnly, 3, 64, 1); }) == ErrorKind::InvalidSize);
    CHECK(error_kind_of([] { synthesize(SynthKind::NoiseOnly, 4, 15, 1); }) == ErrorKind::InvalidSize);
    CHECK(parse_synth_kind("bump-location") == SynthKind::BumpLocation);
  }
}
