#include "tsfc/signature.hpp"

#include <string>

#include "tsfc/error.hpp"

namespace tsfc::signature {

namespace {

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

}  // namespace

TensorSignature::TensorSignature(std::size_t dim, std::size_t depth) : dim_(dim) {
  levels_.reserve(depth);
  for (std::size_t k = 1; k <= depth; ++k) levels_.emplace_back(ipow(dim, k), 0.0);
}

std::vector<double> TensorSignature::flatten() const {
  std::vector<double> out;
  out.reserve(term_count(dim_, depth()));
  for (const auto& lv : levels_) out.insert(out.end(), lv.begin(), lv.end());
  return out;
}

std::size_t TensorSignature::term_count(std::size_t dim, std::size_t depth) {
  std::size_t total = 0;
  for (std::size_t k = 1; k <= depth; ++k) total += ipow(dim, k);
  return total;
}

TensorSignature segment_signature(std::span<const double> increment, std::size_t depth) {
  const auto d = increment.size();
  TensorSignature sig(d, depth);
  if (depth == 0) return sig;
  std::copy(increment.begin(), increment.end(), sig.level(1).begin());
  for (std::size_t k = 2; k <= depth; ++k) {
    // level_k = level_{k-1} (x) increment / k
    const auto prev = sig.level(k - 1);
    auto cur = sig.level(k);
    const double inv_k = 1.0 / static_cast<double>(k);
    for (std::size_t u = 0; u < prev.size(); ++u) {
      for (std::size_t j = 0; j < d; ++j) cur[u * d + j] = prev[u] * increment[j] * inv_k;
    }
  }
  return sig;
}

TensorSignature chen_concat(const TensorSignature& a, const TensorSignature& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) {
    throw Error(ErrorKind::DimensionMismatch, "signatures differ in dimension or depth");
  }
  const auto d = a.dim();
  const auto depth = a.depth();
  TensorSignature out(d, depth);
  for (std::size_t k = 1; k <= depth; ++k) {
    auto res = out.level(k);
    const auto ak = a.level(k);
    const auto bk = b.level(k);
    for (std::size_t w = 0; w < res.size(); ++w) res[w] = ak[w] + bk[w];
    for (std::size_t i = 1; i < k; ++i) {
      const auto ai = a.level(i);
      const auto bj = b.level(k - i);
      const auto stride = bj.size();
      for (std::size_t u = 0; u < ai.size(); ++u) {
        const double au = ai[u];
        if (au == 0.0) continue;
        double* dst = res.data() + u * stride;
        for (std::size_t v = 0; v < stride; ++v) dst[v] += au * bj[v];
      }
    }
  }
  return out;
}

Path time_augment(std::span<const double> series) {
  Path p{{}, 2};
  p.points.reserve(2 * series.size());
  const double denom = series.size() > 1 ? static_cast<double>(series.size() - 1) : 1.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    p.points.push_back(static_cast<double>(i) / denom);
    p.points.push_back(series[i]);
  }
  return p;
}

TensorSignature signature(const Path& path, std::size_t first, std::size_t last, std::size_t depth) {
  if (path.dim == 0 || last >= path.size() || last <= first) {
    throw Error(ErrorKind::PathTooShort, "signature needs at least two points");
  }
  std::vector<double> inc(path.dim);
  auto increment = [&](std::size_t i) {
    const auto p0 = path.point(i);
    const auto p1 = path.point(i + 1);
    for (std::size_t c = 0; c < path.dim; ++c) inc[c] = p1[c] - p0[c];
    return segment_signature(inc, depth);
  };
  auto sig = increment(first);
  for (std::size_t i = first + 1; i < last; ++i) sig = chen_concat(sig, increment(i));
  // level 1 telescopes, so read it off the endpoints instead of the rounded running sum
  const auto p0 = path.point(first);
  const auto p1 = path.point(last);
  for (std::size_t c = 0; c < path.dim; ++c) sig.level(1)[c] = p1[c] - p0[c];
  return sig;
}

TensorSignature signature(const Path& path, std::size_t depth) {
  if (path.size() < 2) throw Error(ErrorKind::PathTooShort, "signature needs at least two points");
  return signature(path, 0, path.size() - 1, depth);
}

std::vector<Window> dyadic_windows(std::size_t m, std::size_t window_depth) {
  if (window_depth >= 32 || m < (std::size_t{1} << window_depth) + 1) {
    throw Error(ErrorKind::SeriesTooShort, "series of length " + std::to_string(m) +
                                               " is too short for window depth " +
                                               std::to_string(window_depth));
  }
  const auto segments = m - 1;
  std::vector<Window> out;
  for (std::size_t level = 0; level <= window_depth; ++level) {
    const std::size_t count = std::size_t{1} << level;
    for (std::size_t j = 0; j < count; ++j) {
      out.push_back({level, j, j * segments / count, (j + 1) * segments / count});
    }
  }
  return out;
}

std::string word_name(std::size_t dim, std::size_t level, std::size_t index) {
  std::vector<std::size_t> letters(level);
  for (std::size_t k = level; k-- > 0;) {
    letters[k] = index % dim;
    index /= dim;
  }
  std::string out = "S(";
  for (std::size_t k = 0; k < level; ++k) {
    if (k) out += ',';
    out += std::to_string(letters[k] + 1);
  }
  return out + ")";
}

FeatureMatrix signature_transform(const TimeSeriesDataset& dataset, std::size_t sig_depth,
                                  std::size_t window_depth) {
  if (sig_depth == 0) throw Error(ErrorKind::InvalidConfig, "signature depth must be >= 1");
  const auto windows = dyadic_windows(dataset.length(), window_depth);
  constexpr std::size_t kDim = 2;
  const auto terms = TensorSignature::term_count(kDim, sig_depth);

  std::vector<std::string> names;
  names.reserve(windows.size() * terms);
  for (const auto& w : windows) {
    const auto prefix = "sig_w" + std::to_string(w.level) + "." + std::to_string(w.index) + "_";
    for (std::size_t k = 1; k <= sig_depth; ++k) {
      const auto n_words = ipow(kDim, k);
      for (std::size_t idx = 0; idx < n_words; ++idx) names.push_back(prefix + word_name(kDim, k, idx));
    }
  }
  FeatureMatrix out(dataset.size(), std::move(names),
                    ColumnProvenance{"signature", "depth=" + std::to_string(sig_depth) +
                                                      ",window_depth=" + std::to_string(window_depth)});
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto path = time_augment(dataset.row(i));
    auto row = out.row(i);
    std::size_t col = 0;
    for (const auto& w : windows) {
      const auto flat = signature(path, w.first, w.last, sig_depth).flatten();
      for (const double v : flat) row[col++] = v;
    }
  }
  return out;
}

}  // namespace tsfc::signature
