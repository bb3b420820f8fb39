#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsfc {

enum class Split { Train, Test };

std::string_view to_string(Split split) noexcept;

/// n equal-length univariate series with string labels. Immutable once
/// constructed; the constructor enforces the ingestion invariants (equal
/// lengths, m >= 2, finite values, one label per row).
class TimeSeriesDataset {
 public:
  TimeSeriesDataset() = default;
  TimeSeriesDataset(std::string name, std::size_t length, std::vector<double> values,
                    std::vector<std::string> labels, Split split);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t length() const noexcept { return length_; }
  Split split() const noexcept { return split_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * length_, length_};
  }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Sorted distinct labels.
  std::vector<std::string> classes() const;

  /// A copy holding only the given rows, in the given order.
  TimeSeriesDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const TimeSeriesDataset&) const = default;

 private:
  std::string name_;
  std::size_t length_ = 0;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  Split split_ = Split::Train;
};

/// A problem's fixed train/test split.
struct SplitPair {
  TimeSeriesDataset train;
  TimeSeriesDataset test;

  const std::string& name() const noexcept { return train.name(); }
};

/// Checks train.m == test.m, test labels are a subset of train labels, and
/// that every class is present in train. Throws Error on violation.
void validate(const SplitPair& pair);

/// Parses the UCR/UEA .ts layout (univariate, equal length, no missing values).
TimeSeriesDataset parse_ts(std::string_view text, Split split = Split::Train);

/// Parses label-first comma-separated rows.
TimeSeriesDataset parse_csv(std::string_view text, std::string name = "csv",
                            Split split = Split::Train);

/// Writes the .ts layout; parse_ts(serialize_ts(d)) == d.
std::string serialize_ts(const TimeSeriesDataset& dataset);

std::string serialize_csv(const TimeSeriesDataset& dataset);

TimeSeriesDataset load_dataset_file(const std::filesystem::path& path, Split split);

/// Loads <root>/<name>/<name>_TRAIN.ts and _TEST.ts (falls back to .csv).
SplitPair load_split_pair(const std::filesystem::path& root, const std::string& name);

/// Dataset root: the override when non-empty, else $TSFC_DATA_DIR, else "data".
std::filesystem::path data_root(const std::string& override_dir = {});

inline constexpr const char* kDataDirEnv = "TSFC_DATA_DIR";

enum class SynthKind { FreqTwoClass, BumpLocation, NoiseOnly };

SynthKind parse_synth_kind(std::string_view name);
std::string_view to_string(SynthKind kind) noexcept;

/// Deterministic two-class fixtures. n is the number of series per split
/// (must be even, classes are exactly balanced), m >= 16.
SplitPair synthesize(SynthKind kind, std::size_t n, std::size_t m, std::uint64_t seed);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace tsfc
