#include "tsfc/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "text_util.hpp"
#include "tsfc/dataset.hpp"
#include "tsfc/error.hpp"

namespace tsfc::stats {

namespace {

// q_alpha(k) for k = 2..20: upper studentized-range quantile (infinite df)
// divided by sqrt(2).
constexpr std::array<double, 19> kQ05{1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878,
                                      3.101730, 3.163684, 3.218654, 3.268004, 3.312739, 3.353618, 3.391230,
                                      3.426041, 3.458425, 3.488685, 3.517073, 3.543799};
constexpr std::array<double, 19> kQ10{1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884,
                                      2.854606, 2.919889, 2.977768, 3.029694, 3.076733, 3.119693, 3.159199,
                                      3.195743, 3.229723, 3.261461, 3.291224, 3.319233};

constexpr double kTieTolerance = 1e-12;

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Ranks of |d| ascending with mean ranks for ties; returns doubled ranks
// (always integers) and the tie-group sizes.
std::pair<std::vector<long>, std::vector<std::size_t>> doubled_abs_ranks(std::span<const double> d) {
  const auto n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<long> ranks2(n);
  std::vector<std::size_t> ties;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && std::abs(d[order[j]]) - std::abs(d[order[i]]) <= kTieTolerance) ++j;
    // positions i..j-1 share rank ((i+1) + j) / 2
    const long r2 = static_cast<long>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks2[order[t]] = r2;
    ties.push_back(j - i);
    i = j;
  }
  return {ranks2, ties};
}

bool same_alpha(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

ResultsTable::ResultsTable(std::vector<std::string> datasets, std::vector<std::string> methods,
                           std::vector<double> accuracies, std::vector<std::size_t> lengths)
    : datasets_(std::move(datasets)),
      methods_(std::move(methods)),
      acc_(std::move(accuracies)),
      lengths_(std::move(lengths)) {
  if (methods_.size() < 2) throw Error(ErrorKind::InvalidSize, "results table needs at least 2 methods");
  if (datasets_.empty()) throw Error(ErrorKind::InvalidSize, "results table needs at least 1 dataset");
  if (acc_.size() != datasets_.size() * methods_.size()) {
    throw Error(ErrorKind::InvalidSize, "results table has missing cells");
  }
  if (!lengths_.empty() && lengths_.size() != datasets_.size()) {
    throw Error(ErrorKind::InvalidSize, "one series length per dataset expected");
  }
  for (const double a : acc_) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorKind::InvalidSize, "accuracy outside [0, 1]");
  }
}

std::vector<double> ResultsTable::column(std::size_t method) const {
  std::vector<double> out(datasets_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, method);
  return out;
}

std::vector<double> ResultsTable::mean_accuracy() const {
  std::vector<double> out(methods_.size(), 0.0);
  for (std::size_t i = 0; i < datasets_.size(); ++i)
    for (std::size_t j = 0; j < methods_.size(); ++j) out[j] += at(i, j);
  for (auto& v : out) v /= static_cast<double>(datasets_.size());
  return out;
}

ResultsTable ResultsTable::subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> names;
  std::vector<double> acc;
  std::vector<std::size_t> lengths;
  for (const auto r : rows) {
    names.push_back(datasets_.at(r));
    const auto rw = row(r);
    acc.insert(acc.end(), rw.begin(), rw.end());
    if (has_lengths()) lengths.push_back(lengths_[r]);
  }
  return {std::move(names), methods_, std::move(acc), std::move(lengths)};
}

std::string ResultsTable::to_csv() const {
  std::string out = "dataset";
  if (has_lengths()) out += ",length";
  for (const auto& m : methods_) out += "," + m;
  out += '\n';
  for (std::size_t i = 0; i < datasets_.size(); ++i) {
    out += datasets_[i];
    if (has_lengths()) out += "," + std::to_string(lengths_[i]);
    for (const double v : row(i)) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

ResultsTable ResultsTable::from_csv(std::string_view body) {
  const auto lines = text::split_lines(body);
  if (lines.empty() || text::trim(lines[0]).empty()) {
    throw Error(ErrorKind::MalformedHeader, "results table is empty");
  }
  const auto header = text::split_on(text::trim(lines[0]), ',');
  if (header.empty() || text::trim(header[0]) != "dataset") {
    throw Error(ErrorKind::MalformedHeader, "results header must start with 'dataset'");
  }
  const bool with_lengths = header.size() > 1 && text::trim(header[1]) == "length";
  const std::size_t first_method = with_lengths ? 2 : 1;
  std::vector<std::string> methods;
  for (std::size_t c = first_method; c < header.size(); ++c) methods.emplace_back(text::trim(header[c]));

  std::vector<std::string> datasets;
  std::vector<double> acc;
  std::vector<std::size_t> lengths;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto line = text::trim(lines[l]);
    if (line.empty()) continue;
    const auto cells = text::split_on(line, ',');
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::MalformedHeader, "results line " + std::to_string(l + 1) + " has " +
                                                  std::to_string(cells.size()) + " cells, expected " +
                                                  std::to_string(header.size()));
    }
    datasets.emplace_back(text::trim(cells[0]));
    if (with_lengths) {
      const auto len = text::parse_number<std::size_t>(cells[1]);
      if (!len) throw Error(ErrorKind::MalformedHeader, "bad length on results line " + std::to_string(l + 1));
      lengths.push_back(*len);
    }
    for (std::size_t c = first_method; c < cells.size(); ++c) {
      const auto v = text::parse_number<double>(cells[c]);
      if (!v) throw Error(ErrorKind::MissingValue, "bad accuracy on results line " + std::to_string(l + 1));
      acc.push_back(*v);
    }
  }
  return {std::move(datasets), std::move(methods), std::move(acc), std::move(lengths)};
}

std::vector<double> rank_row(std::span<const double> values) {
  const auto k = values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(k);
  std::size_t i = 0;
  while (i < k) {
    std::size_t j = i + 1;
    while (j < k && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = r;
    i = j;
  }
  return ranks;
}

std::vector<double> average_ranks(const ResultsTable& table) {
  std::vector<double> sum(table.methods_count(), 0.0);
  for (std::size_t i = 0; i < table.datasets_count(); ++i) {
    const auto r = rank_row(table.row(i));
    for (std::size_t j = 0; j < r.size(); ++j) sum[j] += r[j];
  }
  for (auto& v : sum) v /= static_cast<double>(table.datasets_count());
  return sum;
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

FriedmanResult friedman_test(const ResultsTable& table) {
  const auto n = static_cast<double>(table.datasets_count());
  const auto k = static_cast<double>(table.methods_count());
  const auto ranks = average_ranks(table);
  double spread = 0.0;
  for (const double r : ranks) spread += (r - (k + 1.0) / 2.0) * (r - (k + 1.0) / 2.0);

  double tie_sum = 0.0;
  for (std::size_t i = 0; i < table.datasets_count(); ++i) {
    auto row = std::vector<double>(table.row(i).begin(), table.row(i).end());
    std::sort(row.begin(), row.end());
    std::size_t a = 0;
    while (a < row.size()) {
      std::size_t b = a + 1;
      while (b < row.size() && row[b] == row[a]) ++b;
      const auto t = static_cast<double>(b - a);
      tie_sum += t * t * t - t;
      a = b;
    }
  }
  const double correction = 1.0 - tie_sum / (n * k * (k * k - 1.0));
  if (correction <= 1e-12) throw Error(ErrorKind::DegenerateTable, "every dataset ties all methods");
  FriedmanResult res;
  res.statistic = 12.0 * n / (k * (k + 1.0)) * spread / correction;
  res.p_value = chi_square_sf(res.statistic, k - 1.0);
  return res;
}

double nemenyi_q(std::size_t k, double alpha) {
  if (k < 2 || k > 20) {
    throw Error(ErrorKind::UnsupportedK, "Nemenyi constants cover 2 <= k <= 20, got " + std::to_string(k));
  }
  if (same_alpha(alpha, 0.05)) return kQ05[k - 2];
  if (same_alpha(alpha, 0.10)) return kQ10[k - 2];
  throw Error(ErrorKind::InvalidConfig, "Nemenyi alpha must be 0.05 or 0.10");
}

double nemenyi_cd(std::size_t k, std::size_t n_datasets, double alpha) {
  if (n_datasets == 0) throw Error(ErrorKind::InvalidSize, "critical difference needs N >= 1");
  const auto kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_datasets)));
}

double wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidSize, "paired vectors differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (std::abs(diff) > kTieTolerance) d.push_back(diff);
  }
  if (d.empty()) throw Error(ErrorKind::AllZeroDifferences, "all paired differences are zero");
  const auto n = d.size();
  const auto [ranks2, ties] = doubled_abs_ranks(d);

  long w2 = 0;  // doubled W+
  long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += ranks2[i];
    if (d[i] > 0) w2 += ranks2[i];
  }

  if (n <= kExactWilcoxonLimit) {
    // counts[s] = number of sign assignments whose doubled positive-rank sum is s
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (const long r : ranks2) {
      for (long s = reach; s >= 0; --s) {
        const double c = counts[static_cast<std::size_t>(s)];
        if (c != 0.0) counts[static_cast<std::size_t>(s + r)] += c;
      }
      reach += r;
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total2; ++s) {
      const double c = counts[static_cast<std::size_t>(s)];
      if (s <= w2) lower += c;
      if (s >= w2) upper += c;
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, 2.0 * std::min(lower, upper) / all);
  }

  const auto nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
  for (const auto t : ties) {
    const auto td = static_cast<double>(t);
    var -= (td * td * td - td) / 48.0;
  }
  const double w = static_cast<double>(w2) / 2.0;
  const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  const auto m = p_values.size();
  for (const double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidConfig, "p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double scaled = std::min(1.0, static_cast<double>(m - i) * p_values[order[i]]);
    running = std::max(running, scaled);
    out[order[i]] = running;
  }
  return out;
}

SignificanceMatrix pairwise_matrix(const ResultsTable& table, double alpha) {
  const auto k = table.methods_count();
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < k; ++j) cols.push_back(table.column(j));
  std::vector<double> raw;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      try {
        raw.push_back(wilcoxon_signed_rank(cols[i], cols[j]));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::AllZeroDifferences) throw;
        raw.push_back(1.0);
      }
    }
  }
  const auto adj = holm_adjust(raw);
  SignificanceMatrix out{k, std::vector<char>(k * k, 1), std::vector<double>(k * k, 1.0)};
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j, ++idx) {
      const double p = adj[idx];
      out.adjusted_p[i * k + j] = out.adjusted_p[j * k + i] = p;
      out.same[i * k + j] = out.same[j * k + i] = p >= alpha ? 1 : 0;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> cliques(std::span<const double> sorted_ranks, double cd) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto k = sorted_ranks.size();
  std::size_t last_end = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i;
    while (j + 1 < k && sorted_ranks[j + 1] - sorted_ranks[i] < cd) ++j;
    if (j > i && (out.empty() || j > last_end)) {
      out.emplace_back(i, j);
      last_end = j;
    }
  }
  return out;
}

CdDiagram cd_diagram(const ResultsTable& table, double alpha) {
  const auto k = table.methods_count();
  const auto ranks = average_ranks(table);
  const auto means = table.mean_accuracy();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

  CdDiagram d;
  d.alpha = alpha;
  d.n_datasets = table.datasets_count();
  d.cd = nemenyi_cd(k, d.n_datasets, alpha);
  for (const auto j : order) {
    d.methods.push_back(table.methods()[j]);
    d.ranks.push_back(ranks[j]);
    d.mean_accuracy.push_back(means[j]);
  }
  d.cliques = cliques(d.ranks, d.cd);
  return d;
}

std::string render_svg(const CdDiagram& d) {
  const auto k = d.methods.size();
  const double width = 800.0, left = 160.0, right = 640.0, axis_y = 60.0;
  const auto half = (k + 1) / 2;
  const double clique_top = axis_y + 16.0;
  const double label_top = clique_top + 10.0 * static_cast<double>(d.cliques.size()) + 16.0;
  const double height = label_top + 22.0 * static_cast<double>(half) + 20.0;
  auto x_of = [&](double rank) {
    return k > 1 ? left + (rank - 1.0) / static_cast<double>(k - 1) * (right - left) : left;
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(width, 0) + "\" height=\"" +
       fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // critical difference scale
  const double cd_px = d.cd / std::max<double>(1.0, static_cast<double>(k - 1)) * (right - left);
  s += "<g class=\"cd\" data-cd=\"" + fixed(d.cd, 6) + "\">\n";
  s += "<line x1=\"" + fixed(left, 2) + "\" y1=\"20\" x2=\"" + fixed(left + cd_px, 2) +
       "\" y2=\"20\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + fixed(left + cd_px / 2.0, 2) + "\" y=\"14\" text-anchor=\"middle\">CD = " + fixed(d.cd, 3) +
       "</text>\n</g>\n";

  // rank axis
  s += "<line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(axis_y, 2) + "\" x2=\"" + fixed(right, 2) + "\" y2=\"" +
       fixed(axis_y, 2) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (std::size_t r = 1; r <= k; ++r) {
    const double x = x_of(static_cast<double>(r));
    s += "<line x1=\"" + fixed(x, 2) + "\" y1=\"" + fixed(axis_y - 5, 2) + "\" x2=\"" + fixed(x, 2) + "\" y2=\"" +
         fixed(axis_y, 2) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fixed(x, 2) + "\" y=\"" + fixed(axis_y - 8, 2) + "\" text-anchor=\"middle\">" +
         std::to_string(r) + "</text>\n";
  }

  for (std::size_t c = 0; c < d.cliques.size(); ++c) {
    const auto [a, b] = d.cliques[c];
    std::string members;
    for (std::size_t i = a; i <= b; ++i) members += (i > a ? "|" : "") + xml_escape(d.methods[i]);
    const double y = clique_top + 10.0 * static_cast<double>(c);
    s += "<line class=\"clique\" data-methods=\"" + members + "\" x1=\"" + fixed(x_of(d.ranks[a]) - 4, 2) +
         "\" y1=\"" + fixed(y, 2) + "\" x2=\"" + fixed(x_of(d.ranks[b]) + 4, 2) + "\" y2=\"" + fixed(y, 2) +
         "\" stroke=\"black\" stroke-width=\"4\"/>\n";
  }

  for (std::size_t i = 0; i < k; ++i) {
    const bool left_side = i < half;
    const auto slot = left_side ? i : k - 1 - i;
    const double y = label_top + 22.0 * static_cast<double>(slot);
    const double x = x_of(d.ranks[i]);
    const double end_x = left_side ? left - 10.0 : right + 10.0;
    s += "<g class=\"method\" data-rank=\"" + fixed(d.ranks[i], 6) + "\">\n";
    s += "<polyline points=\"" + fixed(x, 2) + "," + fixed(axis_y, 2) + " " + fixed(x, 2) + "," + fixed(y, 2) + " " +
         fixed(end_x, 2) + "," + fixed(y, 2) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + fixed(left_side ? end_x - 4 : end_x + 4, 2) + "\" y=\"" + fixed(y + 4, 2) +
         "\" text-anchor=\"" + (left_side ? "end" : "start") + "\">" + xml_escape(d.methods[i]) + " (" +
         fixed(d.mean_accuracy[i], 3) + ")</text>\n</g>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string render_svg(const SignificanceMatrix& m, std::span<const std::string> methods) {
  if (methods.size() != m.k) throw Error(ErrorKind::InvalidSize, "one method name per matrix row expected");
  std::size_t longest = 0;
  for (const auto& name : methods) longest = std::max(longest, name.size());
  const double cell = 24.0;
  const double margin = 20.0 + 7.0 * static_cast<double>(longest);
  const double size = margin + cell * static_cast<double>(m.k) + 10.0;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fixed(size, 0) + "\" height=\"" +
       fixed(size, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < m.k; ++i) {
    const double c = margin + cell * (static_cast<double>(i) + 0.5);
    s += "<text x=\"" + fixed(margin - 6, 2) + "\" y=\"" + fixed(c + 4, 2) + "\" text-anchor=\"end\">" +
         xml_escape(methods[i]) + "</text>\n";
    s += "<text transform=\"translate(" + fixed(c + 4, 2) + "," + fixed(margin - 6, 2) +
         ") rotate(-90)\" text-anchor=\"start\">" + xml_escape(methods[i]) + "</text>\n";
  }
  for (std::size_t i = 0; i < m.k; ++i) {
    for (std::size_t j = 0; j < m.k; ++j) {
      const double x = margin + cell * static_cast<double>(j);
      const double y = margin + cell * static_cast<double>(i);
      s += "<rect x=\"" + fixed(x, 2) + "\" y=\"" + fixed(y, 2) + "\" width=\"" + fixed(cell, 2) + "\" height=\"" +
           fixed(cell, 2) + "\" fill=\"" + (m.no_difference(i, j) ? "black" : "white") +
           "\" stroke=\"#888888\" data-p=\"" + fixed(m.p(i, j), 6) + "\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

std::vector<Stratum> stratify_by_length(const ResultsTable& table, std::span<const std::size_t> thresholds) {
  if (!table.has_lengths()) throw Error(ErrorKind::MissingLengths, "results table has no series lengths");
  if (thresholds.empty()) throw Error(ErrorKind::InvalidConfig, "at least one length threshold required");
  const auto& len = table.lengths();
  auto make = [&](std::string label, auto keep) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < len.size(); ++i)
      if (keep(len[i])) rows.push_back(i);
    Stratum s{std::move(label), std::nullopt};
    if (!rows.empty()) s.table = table.subset(rows);
    return s;
  };
  std::vector<Stratum> out;
  const auto t0 = thresholds.front();
  out.push_back(make("<" + std::to_string(t0), [&](std::size_t m) { return m < t0; }));
  for (const auto t : thresholds) out.push_back(make(">" + std::to_string(t), [&](std::size_t m) { return m > t; }));
  return out;
}

}  // namespace tsfc::stats
