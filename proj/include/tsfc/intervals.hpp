#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tsfc/dataset.hpp"
#include "tsfc/feature_matrix.hpp"

namespace tsfc::intervals {

/// Half-open index range [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  bool operator==(const Interval&) const = default;
};

struct IntervalSet {
  std::vector<Interval> intervals;
  std::size_t series_length = 0;
  std::uint64_t seed = 0;

  bool operator==(const IntervalSet&) const = default;
};

/// start ~ U{0..m-min_len}, end ~ U{start+min_len..m}, sampled with
/// replacement. Throws SeriesTooShort when m < min_len.
IntervalSet sample_intervals(std::size_t m, std::size_t n_intervals, std::uint64_t seed,
                             std::size_t min_len = 3);

enum class Aggregation { Mean, Min, Max, Sum, Median, Std, Count, Skew, Q25, Q75 };

std::string_view to_string(Aggregation agg) noexcept;
Aggregation parse_aggregation(std::string_view name);

/// All ten aggregations in their canonical order.
const std::vector<Aggregation>& all_aggregations();

double aggregate(std::span<const double> window, Aggregation agg);

/// One column per (interval, aggregation), interval-major.
FeatureMatrix interval_summary_transform(const TimeSeriesDataset& dataset, const IntervalSet& set,
                                         std::span<const Aggregation> aggregations);

/// The 22-feature bank on every interval, interval-major.
FeatureMatrix interval_bank_transform(const TimeSeriesDataset& dataset, const IntervalSet& set);

}  // namespace tsfc::intervals
