#include "tsfc/cli.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tsfc/random.hpp"
#include "tsfc/stats.hpp"

namespace tsfc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kClassifierStream = 1000;

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::InvalidConfig, std::string("manifest field '") + key + "' has the wrong type");
  }
}

pipeline::ExtractorConfig config_from_object(const json& j, std::uint64_t master) {
  const auto kind = pipeline::parse_extractor_kind(get_or<std::string>(j, "kind", ""));
  auto c = pipeline::ExtractorConfig::defaults(kind, extractor_seed(master, kind));
  c.n_kernels = get_or(j, "n_kernels", c.n_kernels);
  c.feature_budget = get_or(j, "feature_budget", c.feature_budget);
  c.n_kernel_instances = get_or(j, "n_kernel_instances", c.n_kernel_instances);
  c.features_per_kernel = get_or(j, "features_per_kernel", c.features_per_kernel);
  c.n_intervals = get_or(j, "n_intervals", c.n_intervals);
  c.min_interval_length = get_or(j, "min_interval_length", c.min_interval_length);
  c.sig_depth = get_or(j, "sig_depth", c.sig_depth);
  c.window_depth = get_or(j, "window_depth", c.window_depth);
  c.feature_cap = get_or(j, "feature_cap", c.feature_cap);
  if (j.contains("aggregations")) {
    c.aggregations.clear();
    for (const auto& a : j.at("aggregations")) c.aggregations.push_back(intervals::parse_aggregation(a.get<std::string>()));
  }
  c.validate();
  return c;
}

std::string cell_path_name(const Cell& cell) { return cell.key + ".json"; }

std::string method_label(const RunManifest& m, const Cell& c) {
  return m.extractors[c.extractor].label + "/" + m.classifiers[c.classifier] + "/" +
         std::string(pipeline::to_string(m.strategies[c.strategy]));
}

std::string config_key(const pipeline::ExtractorConfig& c) {
  return std::string(pipeline::to_string(c.kind)) + "{" + c.parameters() + "}";
}

// Runs job(i) for i in [0, count) on up to `threads` workers. Jobs must not throw.
template <class Job>
void run_pool(std::size_t count, std::size_t threads, Job job) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Extraction shared by every cell of a (dataset, extractor config).
class ExtractionCache {
 public:
  const pipeline::ExtractResult& get(std::size_t dataset, const pipeline::ExtractorConfig& config,
                                     const SplitPair& pair) {
    std::shared_ptr<Entry> entry;
    {
      std::lock_guard lock(mutex_);
      auto& slot = entries_[{dataset, config_key(config)}];
      if (!slot) slot = std::make_shared<Entry>();
      entry = slot;
    }
    std::call_once(entry->once, [&] {
      try {
        entry->result = pipeline::extract(config, pair);
      } catch (...) {
        entry->error = std::current_exception();
      }
    });
    if (entry->error) std::rethrow_exception(entry->error);
    return entry->result;
  }

 private:
  struct Entry {
    std::once_flag once;
    pipeline::ExtractResult result;
    std::exception_ptr error;
  };
  std::mutex mutex_;
  std::map<std::pair<std::size_t, std::string>, std::shared_ptr<Entry>> entries_;
};

std::vector<SplitPair> load_all(const RunManifest& m) {
  std::vector<SplitPair> out;
  for (const auto& d : m.datasets) out.push_back(load_source(d, m.data_dir));
  return out;
}

std::vector<std::string> names_of(const std::vector<SplitPair>& pairs) {
  std::vector<std::string> out;
  for (const auto& p : pairs) out.push_back(p.name());
  return out;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::UnknownPreset:
    case ErrorKind::BudgetTooSmall:
    case ErrorKind::UnsupportedK:
      return kUsage;
    case ErrorKind::UnequalLength:
    case ErrorKind::MissingValue:
    case ErrorKind::MalformedHeader:
    case ErrorKind::UnknownLabel:
    case ErrorKind::InvalidSize:
    case ErrorKind::MissingLengths:
    case ErrorKind::Io:
      return kData;
    default:
      return kRuntime;
  }
}

std::uint64_t extractor_seed(std::uint64_t master, pipeline::ExtractorKind kind) {
  return derive_seed(master, static_cast<std::uint64_t>(kind));
}

std::uint64_t classifier_seed(std::uint64_t master) { return derive_seed(master, kClassifierStream); }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExtractorEntry extractor_entry(std::string_view name, std::uint64_t master_seed) {
  for (const auto& p : pipeline::preset_names()) {
    if (p == name) return {std::string(name), pipeline::preset(name, master_seed)};
  }
  const auto kind = pipeline::parse_extractor_kind(name);
  return {std::string(pipeline::to_string(kind)),
          {pipeline::ExtractorConfig::defaults(kind, extractor_seed(master_seed, kind))}};
}

RunManifest parse_manifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "manifest must be a JSON object");
  RunManifest m;
  m.seed = get_or<std::uint64_t>(j, "seed", 0);
  m.out = get_or<std::string>(j, "out", m.out.string());
  m.data_dir = get_or<std::string>(j, "data_dir", "");
  m.threads = get_or<std::size_t>(j, "threads", 1);

  for (const auto& d : j.value("datasets", json::array())) {
    if (d.is_string()) {
      m.datasets.push_back({d.get<std::string>(), std::nullopt});
    } else if (d.is_object() && d.contains("synth")) {
      SynthSource s;
      s.kind = parse_synth_kind(get_or<std::string>(d, "synth", ""));
      s.n = get_or(d, "n", s.n);
      s.length = get_or(d, "length", s.length);
      s.seed = get_or(d, "seed", s.seed);
      m.datasets.push_back({"", s});
    } else {
      throw Error(ErrorKind::InvalidConfig, "dataset entries are names or {\"synth\": ...} objects");
    }
  }
  for (const auto& e : j.value("extractors", json::array())) {
    if (e.is_string()) {
      m.extractors.push_back(extractor_entry(e.get<std::string>(), m.seed));
    } else if (e.is_object() && e.contains("preset")) {
      m.extractors.push_back(extractor_entry(get_or<std::string>(e, "preset", ""), m.seed));
    } else if (e.is_object()) {
      auto c = config_from_object(e, m.seed);
      m.extractors.push_back({get_or<std::string>(e, "label", std::string(pipeline::to_string(c.kind))), {c}});
    } else {
      throw Error(ErrorKind::InvalidConfig, "extractor entries are names or objects");
    }
  }
  for (const auto& c : j.value("classifiers", json::array())) {
    const auto name = c.get<std::string>();
    m.classifiers.push_back(classifiers::parse_classifier(name).name());
  }
  for (const auto& s : j.value("strategies", json::array({"FTS"}))) {
    m.strategies.push_back(pipeline::parse_strategy(s.get<std::string>()));
  }

  if (m.datasets.empty()) throw Error(ErrorKind::InvalidConfig, "manifest lists no datasets");
  if (m.extractors.empty()) throw Error(ErrorKind::InvalidConfig, "manifest lists no extractors");
  if (m.classifiers.empty()) throw Error(ErrorKind::InvalidConfig, "manifest lists no classifiers");
  if (m.strategies.empty()) throw Error(ErrorKind::InvalidConfig, "manifest lists no strategies");
  std::set<std::string> labels;
  for (const auto& e : m.extractors) {
    if (!labels.insert(e.label).second) {
      throw Error(ErrorKind::InvalidConfig, "extractor '" + e.label + "' listed twice");
    }
  }
  return m;
}

std::vector<Cell> enumerate_cells(const RunManifest& m, std::span<const std::string> dataset_names) {
  if (dataset_names.size() != m.datasets.size()) {
    throw Error(ErrorKind::InvalidSize, "one name per manifest dataset expected");
  }
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < m.datasets.size(); ++d) {
    for (std::size_t e = 0; e < m.extractors.size(); ++e) {
      std::string ex;
      for (const auto& c : m.extractors[e].configs) ex += (ex.empty() ? "" : "+") + config_key(c);
      for (std::size_t c = 0; c < m.classifiers.size(); ++c) {
        for (std::size_t s = 0; s < m.strategies.size(); ++s) {
          Cell cell{d, e, c, s, {}, {}};
          cell.canonical = dataset_names[d] + "|" + ex + "|" + m.classifiers[c] + "|" +
                           std::string(pipeline::to_string(m.strategies[s])) + "|" + std::to_string(m.seed);
          cell.key = hex16(fnv1a(cell.canonical));
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

SplitPair load_source(const DatasetSource& source, const std::string& data_dir) {
  if (source.synth) {
    const auto& s = *source.synth;
    return synthesize(s.kind, s.n, s.length, s.seed);
  }
  return load_split_pair(data_root(data_dir), source.name);
}

BenchmarkSummary benchmark(const RunManifest& m, std::optional<std::size_t> max_cells, std::ostream& log) {
  const auto pairs = load_all(m);
  const auto names = names_of(pairs);
  const auto cells = enumerate_cells(m, names);
  const auto cell_dir = m.out / "cells";
  fs::create_directories(cell_dir);

  BenchmarkSummary summary;
  summary.total = cells.size();
  std::vector<const Cell*> pending;
  for (const auto& c : cells) {
    if (fs::exists(cell_dir / cell_path_name(c))) {
      ++summary.skipped;
    } else {
      pending.push_back(&c);
    }
  }
  if (max_cells && pending.size() > *max_cells) {
    pending.resize(*max_cells);
    summary.interrupted = true;
  }

  ExtractionCache cache;
  std::mutex log_mutex;
  std::atomic<std::size_t> failed{0};
  const auto cls_seed = classifier_seed(m.seed);
  run_pool(pending.size(), m.threads, [&](std::size_t i) {
    const Cell& cell = *pending[i];
    const auto& pair = pairs[cell.dataset];
    const auto& entry = m.extractors[cell.extractor];
    const auto strategy = m.strategies[cell.strategy];
    nlohmann::ordered_json record;
    try {
      std::vector<pipeline::ExtractResult> features;
      if (strategy != pipeline::StrategyKind::Raw) {
        for (const auto& c : entry.configs) features.push_back(cache.get(cell.dataset, c, pair));
      }
      const auto spec = classifiers::parse_classifier(m.classifiers[cell.classifier]);
      const auto result = pipeline::run_with_features(pair, entry.configs, features, spec, strategy, cls_seed);
      record = nlohmann::ordered_json::parse(pipeline::to_json_line(result));
      record["status"] = "ok";
    } catch (const std::exception& e) {
      ++failed;
      record["status"] = "error";
      record["dataset"] = names[cell.dataset];
      record["message"] = e.what();
      std::lock_guard lock(log_mutex);
      log << "cell " << cell.key << " failed: " << e.what() << '\n';
    }
    record["key"] = cell.key;
    record["method"] = method_label(m, cell);
    record["extractor_label"] = entry.label;
    record["series_length"] = pair.train.length();
    try {
      write_atomic(cell_dir / cell_path_name(cell), record.dump() + "\n");
    } catch (const std::exception& e) {
      ++failed;
      std::lock_guard lock(log_mutex);
      log << "cell " << cell.key << " not saved: " << e.what() << '\n';
    }
  });
  summary.failed = failed;
  summary.computed = pending.size() - summary.failed;

  log << "cells: total " << summary.total << ", computed " << summary.computed << ", skipped " << summary.skipped
      << ", failed " << summary.failed << (summary.interrupted ? ", stopped early" : "") << '\n';
  write_report(m, log);
  return summary;
}

std::size_t write_report(const RunManifest& m, std::ostream& log) {
  const auto pairs = load_all(m);
  const auto names = names_of(pairs);
  const auto cells = enumerate_cells(m, names);
  const auto cell_dir = m.out / "cells";
  fs::create_directories(m.out);

  std::string jsonl;
  std::size_t ok = 0, errors = 0, missing = 0;
  // method label -> per-dataset accuracy
  std::vector<std::string> methods;
  std::map<std::string, std::vector<std::optional<double>>> acc;
  std::map<std::string, std::pair<double, std::size_t>> train_time;
  for (const auto& c : cells) {
    const auto label = method_label(m, c);
    if (!acc.count(label)) {
      methods.push_back(label);
      acc[label].assign(names.size(), std::nullopt);
    }
    const auto path = cell_dir / cell_path_name(c);
    if (!fs::exists(path)) {
      ++missing;
      continue;
    }
    const auto rec = json::parse(read_file(path));
    if (rec.value("status", "") != "ok") {
      ++errors;
      continue;
    }
    ++ok;
    jsonl += rec.dump() + "\n";
    acc[label][c.dataset] = rec.at("accuracy").get<double>();
    auto& t = train_time[label];
    t.first += rec.at("train_seconds").get<double>();
    t.second += 1;
  }
  write_atomic(m.out / "results.jsonl", jsonl);

  std::vector<std::string> complete;
  for (const auto& label : methods) {
    const auto& v = acc[label];
    if (std::all_of(v.begin(), v.end(), [](const auto& x) { return x.has_value(); })) complete.push_back(label);
  }
  nlohmann::ordered_json summary;
  summary["cells_total"] = cells.size();
  summary["ok"] = ok;
  summary["failed"] = errors;
  summary["missing"] = missing;
  summary["complete"] = missing == 0;
  summary["methods"] = json::array();
  for (const auto& label : methods) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& v : acc[label]) {
      if (v) {
        sum += *v;
        ++count;
      }
    }
    nlohmann::ordered_json row;
    row["method"] = label;
    row["datasets"] = count;
    row["mean_accuracy"] = count ? json(sum / static_cast<double>(count)) : json(nullptr);
    const auto& t = train_time[label];
    row["mean_train_seconds"] = t.second ? json(t.first / static_cast<double>(t.second)) : json(nullptr);
    summary["methods"].push_back(row);
  }

  if (complete.size() >= 2) {
    std::vector<double> table;
    std::vector<std::size_t> lengths;
    for (std::size_t d = 0; d < names.size(); ++d) {
      lengths.push_back(pairs[d].train.length());
      for (const auto& label : complete) table.push_back(*acc[label][d]);
    }
    const stats::ResultsTable results(names, complete, std::move(table), std::move(lengths));
    write_atomic(m.out / "results.csv", results.to_csv());
  } else {
    log << "results.csv not written: fewer than two methods have results on every dataset\n";
  }
  write_atomic(m.out / "summary.json", summary.dump(2) + "\n");
  return ok;
}

std::string features_to_csv(const FeatureMatrix& features, std::span<const std::string> labels) {
  if (labels.size() != features.rows()) throw Error(ErrorKind::RowMismatch, "one label per feature row expected");
  std::string out = "label";
  for (const auto& n : features.names()) out += "," + n;
  out += '\n';
  for (std::size_t r = 0; r < features.rows(); ++r) {
    out += labels[r];
    for (const double v : features.row(r)) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::size_t extract_features(const RunManifest& m, std::ostream& log) {
  const auto pairs = load_all(m);
  std::size_t written = 0;
  for (const auto& pair : pairs) {
    const auto dir = m.out / "features" / pair.name();
    fs::create_directories(dir);
    for (const auto& entry : m.extractors) {
      for (const auto& config : entry.configs) {
        const auto result = pipeline::extract(config, pair);
        const std::string stem(pipeline::to_string(config.kind));
        write_atomic(dir / (stem + "_TRAIN.csv"), features_to_csv(result.train, pair.train.labels()));
        write_atomic(dir / (stem + "_TEST.csv"), features_to_csv(result.test, pair.test.labels()));
        log << pair.name() << " " << stem << ": " << result.train.cols() << " features";
        if (result.non_finite_replaced) log << " (" << result.non_finite_replaced << " non-finite values set to 0)";
        log << '\n';
        written += 2;
      }
    }
  }
  return written;
}

void compare(const CompareOptions& o, std::ostream& log) {
  const auto table = stats::ResultsTable::from_csv(read_file(o.results));
  fs::create_directories(o.out);

  const auto diagram = stats::cd_diagram(table, o.alpha);
  const auto matrix = stats::pairwise_matrix(table, o.alpha);
  write_atomic(o.out / "cd_diagram.svg", stats::render_svg(diagram));
  write_atomic(o.out / "pairwise.svg", stats::render_svg(matrix, table.methods()));

  std::string ranks = "method,average_rank,mean_accuracy\n";
  for (std::size_t i = 0; i < diagram.methods.size(); ++i) {
    ranks += diagram.methods[i] + "," + format_double(diagram.ranks[i]) + "," +
             format_double(diagram.mean_accuracy[i]) + "\n";
  }
  write_atomic(o.out / "ranks.csv", ranks);

  auto describe = [](const stats::CdDiagram& d) {
    nlohmann::ordered_json j;
    j["alpha"] = d.alpha;
    j["k"] = d.methods.size();
    j["n_datasets"] = d.n_datasets;
    j["cd"] = d.cd;
    j["methods"] = d.methods;
    j["ranks"] = d.ranks;
    j["mean_accuracy"] = d.mean_accuracy;
    j["cliques"] = json::array();
    for (const auto& [a, b] : d.cliques) {
      std::vector<std::string> members(d.methods.begin() + static_cast<std::ptrdiff_t>(a),
                                       d.methods.begin() + static_cast<std::ptrdiff_t>(b) + 1);
      j["cliques"].push_back(members);
    }
    return j;
  };
  auto summary = describe(diagram);
  try {
    const auto f = stats::friedman_test(table);
    summary["friedman"] = {{"statistic", f.statistic}, {"p_value", f.p_value}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateTable) throw;
    summary["friedman"] = nullptr;
  }

  if (o.stratify) {
    summary["strata"] = json::object();
    for (const auto& s : stats::stratify_by_length(table)) {
      if (!s.table) {
        log << "stratum " << s.label << ": no datasets, diagram skipped\n";
        summary["strata"][s.label] = nullptr;
        continue;
      }
      const std::string tag = (s.label[0] == '<' ? "lt" : "gt") + s.label.substr(1);
      const auto d = stats::cd_diagram(*s.table, o.alpha);
      write_atomic(o.out / ("cd_diagram_" + tag + ".svg"), stats::render_svg(d));
      summary["strata"][s.label] = describe(d);
    }
  }
  write_atomic(o.out / "cd.json", summary.dump(2) + "\n");
  log << "compared " << table.methods_count() << " methods on " << table.datasets_count()
      << " datasets, CD = " << diagram.cd << '\n';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace tsfc::cli
