#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsfc/classifiers.hpp"
#include "tsfc/dataset.hpp"
#include "tsfc/error.hpp"
#include "tsfc/pipeline.hpp"

namespace tsfc::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kRuntime = 4 };

/// Usage for configuration mistakes, data for ingestion failures, runtime otherwise.
int exit_code_for(ErrorKind kind) noexcept;

struct SynthSource {
  SynthKind kind = SynthKind::FreqTwoClass;
  std::size_t n = 60;
  std::size_t length = 128;
  std::uint64_t seed = 0;
};

/// A dataset either read from the data directory by name or generated.
struct DatasetSource {
  std::string name;
  std::optional<SynthSource> synth;
};

/// One extractor column of the grid: a single extractor or a stacked preset.
struct ExtractorEntry {
  std::string label;
  std::vector<pipeline::ExtractorConfig> configs;
};

struct RunManifest {
  std::vector<DatasetSource> datasets;
  std::vector<ExtractorEntry> extractors;
  std::vector<std::string> classifiers;
  std::vector<pipeline::StrategyKind> strategies;
  std::uint64_t seed = 0;
  std::filesystem::path out = "tsfc_out";
  std::string data_dir;
  std::size_t threads = 1;
};

/// JSON manifest:
///   {"datasets": ["Name", {"synth": "freq-two-class", "n": 20, "length": 64, "seed": 1}],
///    "extractors": ["minirocket", {"kind": "intervals_summary", "n_intervals": 50}, {"preset": "Features"}],
///    "classifiers": ["rf100", "ridge"], "strategies": ["FTS", "RAW+FTS"],
///    "seed": 1, "out": "results", "data_dir": "...", "threads": 1}
/// Extractor seeds are derived from the master seed.
RunManifest parse_manifest(std::string_view json_text);

/// Builds an extractor entry from a name, resolving presets first.
ExtractorEntry extractor_entry(std::string_view name, std::uint64_t master_seed);

/// Seed of extractor kind `kind` under a master seed.
std::uint64_t extractor_seed(std::uint64_t master, pipeline::ExtractorKind kind);
/// Seed handed to the classifiers.
std::uint64_t classifier_seed(std::uint64_t master);

std::uint64_t fnv1a(std::string_view text);

struct Cell {
  std::size_t dataset = 0;
  std::size_t extractor = 0;
  std::size_t classifier = 0;
  std::size_t strategy = 0;
  std::string canonical;  // dataset|extractor parameters|classifier|strategy|seed
  std::string key;        // 16 hex digits of fnv1a(canonical)
};

/// Dataset-major grid; names are needed because keys hash dataset names.
std::vector<Cell> enumerate_cells(const RunManifest& manifest, std::span<const std::string> dataset_names);

SplitPair load_source(const DatasetSource& source, const std::string& data_dir);

struct BenchmarkSummary {
  std::size_t total = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;  // already present on disk
  std::size_t failed = 0;
  bool interrupted = false;
};

/// Runs every cell whose result file is absent. max_cells bounds the number of
/// newly computed cells (the remainder is left for a later resume).
BenchmarkSummary benchmark(const RunManifest& manifest, std::optional<std::size_t> max_cells, std::ostream& log);

/// Aggregates cell files into results.jsonl, results.csv and summary.json.
/// Returns the number of ok records.
std::size_t write_report(const RunManifest& manifest, std::ostream& log);

/// Writes one feature file pair per (dataset, extractor) under <out>/features.
std::size_t extract_features(const RunManifest& manifest, std::ostream& log);

struct CompareOptions {
  std::filesystem::path results;
  std::filesystem::path out;
  double alpha = 0.05;
  bool stratify = false;
};

/// CD diagram, pairwise matrix, rank table and cd.json for a results table,
/// plus one diagram per non-empty length stratum when asked.
void compare(const CompareOptions& options, std::ostream& log);

/// Header "label,<names>", values in shortest round-trip form.
std::string features_to_csv(const FeatureMatrix& features, std::span<const std::string> labels);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling then renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace tsfc::cli
