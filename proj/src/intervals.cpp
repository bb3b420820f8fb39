#include "tsfc/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsfc/error.hpp"
#include "tsfc/featurebank.hpp"
#include "tsfc/numeric.hpp"
#include "tsfc/random.hpp"

namespace tsfc::intervals {

namespace {

void check_fits(const TimeSeriesDataset& dataset, const IntervalSet& set) {
  if (dataset.length() != set.series_length) {
    throw Error(ErrorKind::DimensionMismatch, "interval set was sampled for another series length");
  }
}

std::string interval_tag(std::size_t idx, const Interval& iv) {
  return "iv" + std::to_string(idx) + "[" + std::to_string(iv.start) + ":" + std::to_string(iv.end) + "]";
}

}  // namespace

IntervalSet sample_intervals(std::size_t m, std::size_t n_intervals, std::uint64_t seed,
                             std::size_t min_len) {
  if (m < min_len) {
    throw Error(ErrorKind::SeriesTooShort,
                "series length " + std::to_string(m) + " below minimum interval " + std::to_string(min_len));
  }
  if (n_intervals == 0) throw Error(ErrorKind::InvalidConfig, "n_intervals must be >= 1");
  Rng rng(seed);
  IntervalSet set{{}, m, seed};
  set.intervals.reserve(n_intervals);
  const auto sm = static_cast<std::int64_t>(m);
  const auto sl = static_cast<std::int64_t>(min_len);
  for (std::size_t i = 0; i < n_intervals; ++i) {
    const auto start = rng.uniform_int(0, sm - sl);
    const auto end = rng.uniform_int(start + sl, sm);
    set.intervals.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end)});
  }
  return set;
}

std::string_view to_string(Aggregation agg) noexcept {
  switch (agg) {
    case Aggregation::Mean: return "mean";
    case Aggregation::Min: return "min";
    case Aggregation::Max: return "max";
    case Aggregation::Sum: return "sum";
    case Aggregation::Median: return "med";
    case Aggregation::Std: return "std";
    case Aggregation::Count: return "count";
    case Aggregation::Skew: return "skew";
    case Aggregation::Q25: return "quant25";
    case Aggregation::Q75: return "quant75";
  }
  return "unknown";
}

Aggregation parse_aggregation(std::string_view name) {
  for (const auto agg : all_aggregations()) {
    if (to_string(agg) == name) return agg;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown aggregation '" + std::string(name) + "'");
}

const std::vector<Aggregation>& all_aggregations() {
  static const std::vector<Aggregation> all{Aggregation::Mean, Aggregation::Min,    Aggregation::Max,
                                            Aggregation::Sum,  Aggregation::Median, Aggregation::Std,
                                            Aggregation::Count, Aggregation::Skew,  Aggregation::Q25,
                                            Aggregation::Q75};
  return all;
}

double aggregate(std::span<const double> w, Aggregation agg) {
  if (w.empty()) throw Error(ErrorKind::WindowTooShort, "empty interval");
  const double len = static_cast<double>(w.size());
  switch (agg) {
    case Aggregation::Mean: return mean_of(w);
    case Aggregation::Min: return *std::min_element(w.begin(), w.end());
    case Aggregation::Max: return *std::max_element(w.begin(), w.end());
    case Aggregation::Sum: {
      double s = 0.0;
      for (const double v : w) s += v;
      return s;
    }
    case Aggregation::Count: return len;
    case Aggregation::Std:
    case Aggregation::Skew: {
      const double mu = mean_of(w);
      double m2 = 0.0, m3 = 0.0;
      for (const double v : w) {
        const double d = v - mu;
        m2 += d * d;
        m3 += d * d * d;
      }
      m2 /= len;
      m3 /= len;
      const double sd = std::sqrt(m2);
      if (agg == Aggregation::Std) return sd;
      return sd > 0.0 ? m3 / (m2 * sd) : 0.0;
    }
    case Aggregation::Median:
    case Aggregation::Q25:
    case Aggregation::Q75: {
      std::vector<double> sorted(w.begin(), w.end());
      std::sort(sorted.begin(), sorted.end());
      const double q = agg == Aggregation::Median ? 0.5 : agg == Aggregation::Q25 ? 0.25 : 0.75;
      return quantile_sorted(sorted, q);
    }
  }
  return 0.0;
}

FeatureMatrix interval_summary_transform(const TimeSeriesDataset& dataset, const IntervalSet& set,
                                         std::span<const Aggregation> aggregations) {
  check_fits(dataset, set);
  if (aggregations.empty()) throw Error(ErrorKind::InvalidConfig, "no aggregations requested");
  std::vector<std::string> names;
  names.reserve(set.intervals.size() * aggregations.size());
  for (std::size_t k = 0; k < set.intervals.size(); ++k) {
    for (const auto agg : aggregations) {
      names.push_back(interval_tag(k, set.intervals[k]) + "_" + std::string(to_string(agg)));
    }
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"intervals_summary",
                                     "n_intervals=" + std::to_string(set.intervals.size()) +
                                         ",seed=" + std::to_string(set.seed)});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    auto row = out.row(i);
    std::size_t col = 0;
    for (const auto& iv : set.intervals) {
      const auto w = x.subspan(iv.start, iv.length());
      for (const auto agg : aggregations) row[col++] = aggregate(w, agg);
    }
  }
  return out;
}

FeatureMatrix interval_bank_transform(const TimeSeriesDataset& dataset, const IntervalSet& set) {
  check_fits(dataset, set);
  const auto& feature_names = featurebank::feature_names();
  std::vector<std::string> names;
  names.reserve(set.intervals.size() * featurebank::kFeatureCount);
  for (std::size_t k = 0; k < set.intervals.size(); ++k) {
    for (const auto f : feature_names) names.push_back(interval_tag(k, set.intervals[k]) + "_" + std::string(f));
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"intervals_bank",
                                     "n_intervals=" + std::to_string(set.intervals.size()) +
                                         ",seed=" + std::to_string(set.seed)});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    auto row = out.row(i);
    for (std::size_t k = 0; k < set.intervals.size(); ++k) {
      const auto& iv = set.intervals[k];
      const auto values = featurebank::compute_bank(x.subspan(iv.start, iv.length()));
      std::copy(values.begin(), values.end(), row.begin() + static_cast<std::ptrdiff_t>(k * values.size()));
    }
  }
  return out;
}

}  // namespace tsfc::intervals
