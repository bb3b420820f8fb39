#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "tsfc/cli.hpp"
#include "tsfc/dataset.hpp"
#include "tsfc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tsfc;

namespace {

struct Globals {
  std::string data_dir;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

cli::RunManifest load_manifest(const std::string& path, const Globals& g) {
  auto j = nlohmann::json::parse(cli::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::InvalidConfig, "manifest " + path + " is not valid JSON");
  // the seed feeds extractor seeds, so it is applied before parsing
  if (g.seed) j["seed"] = *g.seed;
  auto m = cli::parse_manifest(j.dump());
  if (!g.out.empty()) m.out = g.out;
  if (!g.data_dir.empty()) m.data_dir = g.data_dir;
  if (g.threads) m.threads = *g.threads;
  return m;
}

void apply_overrides(cli::RunManifest& m, const std::vector<std::string>& strategies,
                     const std::vector<std::string>& presets) {
  if (!strategies.empty()) {
    m.strategies.clear();
    for (const auto& s : strategies) m.strategies.push_back(pipeline::parse_strategy(s));
  }
  for (const auto& p : presets) {
    m.extractors.push_back({p, pipeline::preset(p, m.seed)});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-based time series classification benchmarks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--data-dir", g.data_dir, "Dataset root (default: $" + std::string(kDataDirEnv) + ")");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic train/test pair as .ts files");
  std::string synth_kind = "freq-two-class";
  std::size_t synth_n = 60, synth_length = 128;
  synth->add_option("--kind", synth_kind, "freq-two-class, bump-location or noise-only");
  synth->add_option("--n", synth_n, "Series per split (even)");
  synth->add_option("--length", synth_length, "Series length");

  auto* extract = app.add_subcommand("extract", "Write feature files per dataset and extractor");
  std::string extract_manifest, extract_dataset;
  std::vector<std::string> extract_extractors;
  std::vector<std::string> extract_presets;
  extract->add_option("--manifest", extract_manifest, "Run manifest (JSON)");
  extract->add_option("--dataset", extract_dataset, "Dataset name under the data directory");
  extract->add_option("--extractor", extract_extractors, "Extractor name (repeatable)");
  extract->add_option("--preset", extract_presets, "Preset name (repeatable)");

  auto* bench = app.add_subcommand("benchmark", "Run the dataset x extractor x classifier x strategy grid");
  std::string bench_manifest;
  std::optional<std::size_t> max_cells;
  std::vector<std::string> bench_strategies, bench_presets;
  bench->add_option("--manifest", bench_manifest, "Run manifest (JSON)")->required();
  bench->add_option("--max-cells", max_cells, "Stop after computing this many new cells");
  bench->add_option("--strategy", bench_strategies, "Override the manifest strategies (repeatable)");
  bench->add_option("--preset", bench_presets, "Add a preset stack as an extractor (repeatable)");

  auto* cmp = app.add_subcommand("compare", "CD diagram, pairwise matrix and ranks from a results table");
  std::string cmp_results;
  double alpha = 0.05;
  bool stratify = false;
  cmp->add_option("--results", cmp_results, "results.csv (default: <out>/results.csv)");
  cmp->add_option("--alpha", alpha, "Significance level (0.05 or 0.10)");
  cmp->add_flag("--stratify", stratify, "Also draw diagrams per series-length stratum");

  auto* report = app.add_subcommand("report", "Aggregate cell results of a manifest");
  std::string report_manifest;
  report->add_option("--manifest", report_manifest, "Run manifest (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (synth->parsed()) {
      const auto pair = synthesize(parse_synth_kind(synth_kind), synth_n, synth_length, g.seed.value_or(0));
      const fs::path dir = fs::path(g.out.empty() ? "." : g.out) / pair.name();
      cli::write_atomic(dir / (pair.name() + "_TRAIN.ts"), serialize_ts(pair.train));
      cli::write_atomic(dir / (pair.name() + "_TEST.ts"), serialize_ts(pair.test));
      std::cout << dir.string() << '\n';
    } else if (extract->parsed()) {
      cli::RunManifest m;
      if (!extract_manifest.empty()) {
        m = load_manifest(extract_manifest, g);
      } else {
        if (extract_dataset.empty() || (extract_extractors.empty() && extract_presets.empty())) {
          std::cerr << "extract needs --manifest, or --dataset with --extractor/--preset\n";
          return cli::kUsage;
        }
        m.seed = g.seed.value_or(0);
        m.out = g.out.empty() ? "tsfc_out" : g.out;
        m.data_dir = g.data_dir;
        m.datasets.push_back({extract_dataset, std::nullopt});
        for (const auto& e : extract_extractors) m.extractors.push_back(cli::extractor_entry(e, m.seed));
      }
      apply_overrides(m, {}, extract_presets);
      cli::extract_features(m, std::cout);
    } else if (bench->parsed()) {
      auto m = load_manifest(bench_manifest, g);
      apply_overrides(m, bench_strategies, bench_presets);
      const auto s = cli::benchmark(m, max_cells, std::cout);
      if (s.failed > 0) std::cerr << s.failed << " cell(s) failed, see the cell records\n";
    } else if (cmp->parsed()) {
      cli::CompareOptions o;
      const fs::path out = g.out.empty() ? fs::path(".") : fs::path(g.out);
      o.results = cmp_results.empty() ? out / "results.csv" : fs::path(cmp_results);
      o.out = out;
      o.alpha = alpha;
      o.stratify = stratify;
      cli::compare(o, std::cout);
    } else if (report->parsed()) {
      const auto m = load_manifest(report_manifest, g);
      const auto ok = cli::write_report(m, std::cout);
      std::cout << ok << " result records\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kRuntime;
  }
  return cli::kOk;
}
