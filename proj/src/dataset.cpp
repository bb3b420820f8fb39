#include "tsfc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tsfc/error.hpp"
#include "tsfc/random.hpp"
#include "text_util.hpp"

namespace tsfc {

namespace {

using text::split_lines;
using text::split_on;
using text::trim;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_value(std::string_view token, std::size_t line_no) {
  token = trim(token);
  if (token.empty() || token == "?") {
    throw Error(ErrorKind::MissingValue, "missing value on line " + std::to_string(line_no));
  }
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::MissingValue,
                "non-numeric value '" + std::string(token) + "' on line " + std::to_string(line_no));
  }
  return value;
}

bool parse_bool(std::string_view token) {
  const auto t = lower(trim(token));
  if (t == "true") return true;
  if (t == "false") return false;
  throw Error(ErrorKind::MalformedHeader, "expected true/false, got '" + std::string(token) + "'");
}

std::size_t parse_count(std::string_view token) {
  token = trim(token);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorKind::MalformedHeader, "expected integer, got '" + std::string(token) + "'");
  }
  return value;
}

// Splits "key rest of line" into lowercase key and the trimmed remainder.
std::pair<std::string, std::string_view> directive(std::string_view line) {
  const auto space = line.find_first_of(" \t");
  if (space == std::string_view::npos) return {lower(line), {}};
  return {lower(line.substr(0, space)), trim(line.substr(space + 1))};
}

}  // namespace

std::string_view to_string(Split split) noexcept {
  return split == Split::Train ? "train" : "test";
}

TimeSeriesDataset::TimeSeriesDataset(std::string name, std::size_t length,
                                     std::vector<double> values,
                                     std::vector<std::string> labels, Split split)
    : name_(std::move(name)),
      length_(length),
      values_(std::move(values)),
      labels_(std::move(labels)),
      split_(split) {
  if (length_ < 2) throw Error(ErrorKind::InvalidSize, "series length must be >= 2");
  if (labels_.empty()) throw Error(ErrorKind::InvalidSize, "dataset has no series");
  if (values_.size() != labels_.size() * length_) {
    throw Error(ErrorKind::UnequalLength, "value count does not match n * m");
  }
  for (const double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::MissingValue, "non-finite value in series");
  }
}

std::vector<std::string> TimeSeriesDataset::classes() const {
  std::set<std::string> s(labels_.begin(), labels_.end());
  return {s.begin(), s.end()};
}

TimeSeriesDataset TimeSeriesDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  std::vector<std::string> labels;
  values.reserve(rows.size() * length_);
  labels.reserve(rows.size());
  for (const auto r : rows) {
    const auto x = row(r);
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(labels_[r]);
  }
  return {name_, length_, std::move(values), std::move(labels), split_};
}

void validate(const SplitPair& pair) {
  if (pair.train.length() != pair.test.length()) {
    throw Error(ErrorKind::UnequalLength, "train and test series lengths differ");
  }
  const auto train_classes = pair.train.classes();
  for (const auto& label : pair.test.labels()) {
    if (!std::binary_search(train_classes.begin(), train_classes.end(), label)) {
      throw Error(ErrorKind::UnknownLabel, "test label '" + label + "' absent from train split");
    }
  }
}

TimeSeriesDataset parse_ts(std::string_view text, Split split) {
  std::string name;
  std::vector<std::string> declared;
  bool have_labels = false;
  bool in_data = false;
  std::size_t declared_length = 0;
  std::size_t length = 0;
  std::vector<double> values;
  std::vector<std::string> labels;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    const auto line_no = i + 1;
    if (line.empty() || line.front() == '#') continue;

    if (!in_data) {
      if (line.front() != '@') {
        throw Error(ErrorKind::MalformedHeader,
                    "unexpected content before @data on line " + std::to_string(line_no));
      }
      const auto [key, rest] = directive(line);
      if (key == "@problemname") {
        name = std::string(rest);
      } else if (key == "@timestamps") {
        if (parse_bool(rest)) throw Error(ErrorKind::MalformedHeader, "time stamps are not supported");
      } else if (key == "@univariate") {
        if (!parse_bool(rest)) throw Error(ErrorKind::MalformedHeader, "only univariate problems are supported");
      } else if (key == "@dimensions") {
        if (parse_count(rest) != 1) throw Error(ErrorKind::MalformedHeader, "only univariate problems are supported");
      } else if (key == "@equallength") {
        if (!parse_bool(rest)) throw Error(ErrorKind::UnequalLength, "unequal-length problems are not supported");
      } else if (key == "@serieslength") {
        declared_length = parse_count(rest);
      } else if (key == "@classlabel") {
        auto tokens = split_on(rest, ' ');
        tokens.erase(std::remove_if(tokens.begin(), tokens.end(),
                                    [](std::string_view t) { return trim(t).empty(); }),
                     tokens.end());
        if (tokens.empty() || !parse_bool(tokens.front())) {
          throw Error(ErrorKind::MalformedHeader, "@classLabel true <labels...> is required");
        }
        for (std::size_t t = 1; t < tokens.size(); ++t) declared.emplace_back(trim(tokens[t]));
        if (declared.empty()) throw Error(ErrorKind::MalformedHeader, "@classLabel lists no labels");
        have_labels = true;
      } else if (key == "@targetlabel") {
        throw Error(ErrorKind::MalformedHeader, "regression problems are not supported");
      } else if (key == "@data") {
        if (!have_labels) throw Error(ErrorKind::MalformedHeader, "@data before @classLabel");
        in_data = true;
      }
      // @missing and unknown directives carry nothing we need; values are validated anyway
      continue;
    }

    const auto colon = line.rfind(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::MalformedHeader, "record without label on line " + std::to_string(line_no));
    }
    const auto body = line.substr(0, colon);
    const auto label = std::string(trim(line.substr(colon + 1)));
    if (body.find(':') != std::string_view::npos) {
      throw Error(ErrorKind::MalformedHeader, "multivariate record on line " + std::to_string(line_no));
    }
    if (std::find(declared.begin(), declared.end(), label) == declared.end()) {
      throw Error(ErrorKind::UnknownLabel, "label '" + label + "' on line " + std::to_string(line_no));
    }
    const auto tokens = split_on(body, ',');
    if (labels.empty()) {
      length = tokens.size();
      if (declared_length != 0 && declared_length != length) {
        throw Error(ErrorKind::UnequalLength, "first record disagrees with @seriesLength");
      }
    } else if (tokens.size() != length) {
      throw Error(ErrorKind::UnequalLength, "record on line " + std::to_string(line_no) + " has " +
                                                std::to_string(tokens.size()) + " values, expected " +
                                                std::to_string(length));
    }
    for (const auto token : tokens) values.push_back(parse_value(token, line_no));
    labels.push_back(label);
  }

  if (!in_data) throw Error(ErrorKind::MalformedHeader, "missing @data section");
  if (labels.empty()) throw Error(ErrorKind::MalformedHeader, "no records after @data");
  return {std::move(name), length, std::move(values), std::move(labels), split};
}

TimeSeriesDataset parse_csv(std::string_view text, std::string name, Split split) {
  std::size_t length = 0;
  std::vector<double> values;
  std::vector<std::string> labels;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto tokens = split_on(line, ',');
    const auto label = trim(tokens.front());
    if (label.empty()) throw Error(ErrorKind::MalformedHeader, "empty label on line " + std::to_string(i + 1));
    const auto m = tokens.size() - 1;
    if (labels.empty()) {
      length = m;
    } else if (m != length) {
      throw Error(ErrorKind::UnequalLength, "row on line " + std::to_string(i + 1) + " has " +
                                                std::to_string(m) + " values, expected " +
                                                std::to_string(length));
    }
    for (std::size_t t = 1; t < tokens.size(); ++t) values.push_back(parse_value(tokens[t], i + 1));
    labels.emplace_back(label);
  }
  if (labels.empty()) throw Error(ErrorKind::MalformedHeader, "empty input");
  return {std::move(name), length, std::move(values), std::move(labels), split};
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string serialize_ts(const TimeSeriesDataset& dataset) {
  std::string out;
  out += "@problemName " + dataset.name() + "\n";
  out += "@timeStamps false\n@missing false\n@univariate true\n@equalLength true\n";
  out += "@seriesLength " + std::to_string(dataset.length()) + "\n";
  out += "@classLabel true";
  for (const auto& c : dataset.classes()) out += " " + c;
  out += "\n@data\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto x = dataset.row(i);
    for (std::size_t t = 0; t < x.size(); ++t) {
      if (t) out += ',';
      out += format_double(x[t]);
    }
    out += ':' + dataset.labels()[i] + '\n';
  }
  return out;
}

std::string serialize_csv(const TimeSeriesDataset& dataset) {
  std::string out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out += dataset.labels()[i];
    for (const double v : dataset.row(i)) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

TimeSeriesDataset load_dataset_file(const std::filesystem::path& path, Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  if (path.extension() == ".csv") return parse_csv(text, path.stem().string(), split);
  return parse_ts(text, split);
}

SplitPair load_split_pair(const std::filesystem::path& root, const std::string& name) {
  const auto dir = root / name;
  auto load = [&](const char* suffix, Split split) {
    auto path = dir / (name + suffix + std::string(".ts"));
    if (!std::filesystem::exists(path)) path = dir / (name + suffix + std::string(".csv"));
    auto d = load_dataset_file(path, split);
    if (d.name() == name) return d;
    std::vector<double> values(d.values().begin(), d.values().end());
    return TimeSeriesDataset(name, d.length(), std::move(values), d.labels(), split);
  };
  SplitPair pair{load("_TRAIN", Split::Train), load("_TEST", Split::Test)};
  validate(pair);
  return pair;
}

std::filesystem::path data_root(const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') return env;
  return "data";
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "freq-two-class") return SynthKind::FreqTwoClass;
  if (name == "bump-location") return SynthKind::BumpLocation;
  if (name == "noise-only") return SynthKind::NoiseOnly;
  throw Error(ErrorKind::InvalidConfig, "unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::FreqTwoClass: return "freq-two-class";
    case SynthKind::BumpLocation: return "bump-location";
    case SynthKind::NoiseOnly: return "noise-only";
  }
  return "unknown";
}

SplitPair synthesize(SynthKind kind, std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw Error(ErrorKind::InvalidSize, "n must be even and positive");
  if (m < 16) throw Error(ErrorKind::InvalidSize, "m must be >= 16");

  Rng rng(seed);
  const std::string name = std::string(to_string(kind)) + "_n" + std::to_string(n) + "_m" +
                           std::to_string(m) + "_s" + std::to_string(seed);
  const double len = static_cast<double>(m);

  auto make = [&](Split split) {
    std::vector<double> values;
    std::vector<std::string> labels;
    values.reserve(n * m);
    for (std::size_t i = 0; i < n; ++i) {
      const int cls = static_cast<int>(i % 2);
      labels.push_back(cls == 0 ? "c0" : "c1");
      switch (kind) {
        case SynthKind::FreqTwoClass: {
          const double cycles = cls == 0 ? 3.0 : 5.0;
          const double phase = rng.uniform(0.0, 2.0 * M_PI);
          for (std::size_t t = 0; t < m; ++t) {
            values.push_back(std::sin(2.0 * M_PI * cycles * static_cast<double>(t) / len + phase) +
                             0.5 * rng.normal());
          }
          break;
        }
        case SynthKind::BumpLocation: {
          const double centre = (cls == 0 ? 0.3 : 0.7) * len + rng.uniform(-0.1, 0.1) * len;
          const double width = len / 16.0;
          for (std::size_t t = 0; t < m; ++t) {
            const double z = (static_cast<double>(t) - centre) / width;
            values.push_back(2.0 * std::exp(-0.5 * z * z) + 0.5 * rng.normal());
          }
          break;
        }
        case SynthKind::NoiseOnly:
          for (std::size_t t = 0; t < m; ++t) values.push_back(rng.normal());
          break;
      }
    }
    return TimeSeriesDataset(name, m, std::move(values), std::move(labels), split);
  };

  auto train = make(Split::Train);
  auto test = make(Split::Test);
  return {std::move(train), std::move(test)};
}

}  // namespace tsfc
