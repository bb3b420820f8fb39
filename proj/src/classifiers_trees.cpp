#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "classifiers_internal.hpp"
#include "tsfc/classifiers.hpp"
#include "tsfc/error.hpp"
#include "tsfc/random.hpp"

namespace tsfc::classifiers {

namespace {

struct TableView {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

int argmax_lowest(std::span<const double> counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

struct SplitChoice {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

// Weighted Gini (n_l * gini_l + n_r * gini_r) sweep over one feature.
// Returns false when the feature is constant over the rows.
bool best_threshold(const TableView& x, std::span<const int> codes, std::size_t n_classes,
                    std::span<const std::size_t> rows, std::size_t feature,
                    std::vector<std::pair<double, int>>& scratch, SplitChoice& best) {
  scratch.clear();
  for (const auto r : rows) scratch.emplace_back(x.at(r, feature), codes[r]);
  std::sort(scratch.begin(), scratch.end());
  if (scratch.front().first == scratch.back().first) return false;

  std::vector<double> left(n_classes, 0.0), right(n_classes, 0.0);
  for (const auto& [v, c] : scratch) right[static_cast<std::size_t>(c)] += 1.0;
  double left_sq = 0.0, right_sq = 0.0;
  for (const double r : right) right_sq += r * r;
  const double total = static_cast<double>(scratch.size());

  for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
    const auto c = static_cast<std::size_t>(scratch[i].second);
    left_sq += 2.0 * left[c] + 1.0;
    left[c] += 1.0;
    right_sq -= 2.0 * right[c] - 1.0;
    right[c] -= 1.0;
    if (scratch[i].first == scratch[i + 1].first) continue;
    const double nl = static_cast<double>(i + 1);
    const double nr = total - nl;
    const double impurity = (nl - left_sq / nl) + (nr - right_sq / nr);
    if (!best.valid || impurity < best.impurity) {
      const double lo = scratch[i].first;
      const double hi = scratch[i + 1].first;
      double thr = lo + (hi - lo) / 2.0;
      if (!(thr < hi)) thr = lo;
      best = {true, feature, thr, impurity};
    }
  }
  return true;
}

DecisionTree grow(const TableView& x, std::span<const int> codes, std::size_t n_classes,
                  std::span<const std::size_t> sample, const TreeOptions& options, std::uint64_t seed) {
  Rng rng(seed);
  DecisionTree tree;
  const std::size_t mtry = options.max_features == 0 ? x.cols : std::min(options.max_features, x.cols);
  const bool all_features = mtry == x.cols;

  std::vector<std::size_t> features(x.cols);
  std::vector<std::pair<double, int>> scratch;
  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, {sample.begin(), sample.end()}});

  while (!stack.empty()) {
    auto [node_id, rows] = std::move(stack.back());
    stack.pop_back();
    auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.distribution.assign(n_classes, 0.0);
    for (const auto r : rows) node.distribution[static_cast<std::size_t>(codes[r])] += 1.0;
    const auto present = std::count_if(node.distribution.begin(), node.distribution.end(),
                                       [](double v) { return v > 0.0; });
    if (present <= 1 || rows.size() < options.min_samples_split) continue;

    std::iota(features.begin(), features.end(), std::size_t{0});
    if (!all_features) rng.shuffle(features);
    SplitChoice best;
    std::size_t visited = 0;
    for (const auto f : features) {
      if (visited >= mtry && best.valid) break;
      if (best_threshold(x, codes, n_classes, rows, f, scratch, best)) ++visited;
    }
    if (!best.valid) continue;  // every feature constant here

    std::vector<std::size_t> left, right;
    for (const auto r : rows) (x.at(r, best.feature) <= best.threshold ? left : right).push_back(r);
    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& parent = tree.nodes[static_cast<std::size_t>(node_id)];
    parent.feature = static_cast<int>(best.feature);
    parent.threshold = best.threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    stack.push_back({left_id + 1, std::move(right)});
    stack.push_back({left_id, std::move(left)});
  }
  return tree;
}

// Runs job(i) for i in [0, count) on up to `threads` workers; results are
// written by index so scheduling cannot change them.
template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job job) {
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

ClassCodes forest_classes(const FeatureMatrix& x, std::span<const std::string> y) {
  if (x.rows() != y.size()) throw Error(ErrorKind::RowMismatch, "feature rows and labels differ in count");
  if (x.rows() < 2) throw Error(ErrorKind::InvalidSize, "forests need at least two rows");
  auto codes = ClassCodes::from(y);
  if (codes.classes.size() < 2) throw Error(ErrorKind::ClassMissing, "training labels contain fewer than two classes");
  return codes;
}

}  // namespace

int DecisionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  }
  return argmax_lowest(nodes[i].distribution);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.feature < 0; }));
}

DecisionTree grow_tree(const FeatureMatrix& x, std::span<const int> codes, std::size_t n_classes,
                       std::span<const std::size_t> sample, const TreeOptions& options,
                       std::uint64_t seed) {
  return grow({x.values(), x.rows(), x.cols()}, codes, n_classes, sample, options, seed);
}

TrainedModel fit_random_forest(const FeatureMatrix& x, std::span<const std::string> y,
                               std::size_t n_trees, std::uint64_t seed, std::size_t threads) {
  auto codes = forest_classes(x, y);
  if (n_trees == 0) throw Error(ErrorKind::InvalidConfig, "n_trees must be >= 1");
  const auto labels = codes.encode(y);
  const auto n = x.rows();
  const TreeOptions options{
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols())))), 2};

  ForestModel model;
  model.trees.resize(n_trees);
  parallel_for(n_trees, threads, [&](std::size_t t) {
    const auto tree_seed = derive_seed(seed, t);
    Rng rng(tree_seed);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    model.trees[t] = grow({x.values(), n, x.cols()}, labels, codes.classes.size(), sample, options,
                          derive_seed(tree_seed, 1));
  });

  TrainedModel m;
  m.kind = ClassifierKind::RandomForest;
  m.classes = std::move(codes.classes);
  m.n_features = x.cols();
  m.parameters = std::move(model);
  return m;
}

// ---------------------------------------------------------------------------
// Rotation forest

EigenResult jacobi_eigen(std::span<const double> symmetric, std::size_t s, double tol,
                         std::size_t max_sweeps) {
  std::vector<double> a(symmetric.begin(), symmetric.end());
  std::vector<double> v(s * s, 0.0);
  for (std::size_t i = 0; i < s; ++i) v[i * s + i] = 1.0;
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * s + j]; };
  auto V = [&](std::size_t i, std::size_t j) -> double& { return v[i * s + j]; };

  double norm = 0.0;
  for (const double x : a) norm += x * x;
  const double threshold = tol * std::max(1.0, std::sqrt(norm));

  EigenResult res;
  for (res.sweeps = 0; res.sweeps <= max_sweeps; ++res.sweeps) {
    double off = 0.0;
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j)
        if (i != j) off += A(i, j) * A(i, j);
    if (std::sqrt(off) <= threshold) {
      res.converged = true;
      break;
    }
    if (res.sweeps == max_sweeps) break;
    for (std::size_t p = 0; p + 1 < s; ++p) {
      for (std::size_t q = p + 1; q < s; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < s; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - sn * akq;
          A(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < s; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - sn * aqk;
          A(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < s; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - sn * vkq;
          V(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return A(i, i) > A(j, j); });
  res.values.resize(s);
  res.vectors.resize(s * s);
  for (std::size_t j = 0; j < s; ++j) {
    res.values[j] = A(order[j], order[j]);
    for (std::size_t i = 0; i < s; ++i) res.vectors[i * s + j] = V(i, order[j]);
  }
  return res;
}

std::pair<std::vector<double>, bool> principal_rotation(std::span<const double> covariance, std::size_t s) {
  std::vector<double> identity(s * s, 0.0);
  for (std::size_t i = 0; i < s; ++i) identity[i * s + i] = 1.0;
  double scale = 0.0;
  for (const double c : covariance) scale = std::max(scale, std::abs(c));
  if (!(scale > 0.0) || !std::isfinite(scale)) return {std::move(identity), true};
  auto eig = jacobi_eigen(covariance, s);
  if (!eig.converged) return {std::move(identity), true};
  return {std::move(eig.vectors), false};
}

namespace {

// Applies a tree's block rotations to already-normalised rows.
std::vector<double> rotate(const RotationTree& rt, std::span<const double> values, std::size_t rows,
                           std::size_t cols) {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = values.data() + r * cols;
    double* dst = out.data() + r * cols;
    std::size_t col = 0;
    for (std::size_t g = 0; g < rt.groups.size(); ++g) {
      const auto& group = rt.groups[g];
      const auto& rot = rt.rotations[g];
      const auto s = group.size();
      for (std::size_t j = 0; j < s; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s; ++i) acc += src[group[i]] * rot[i * s + j];
        dst[col + j] = acc;
      }
      col += s;
    }
  }
  return out;
}

}  // namespace

TrainedModel fit_rotation_forest(const FeatureMatrix& x, std::span<const std::string> y,
                                 std::size_t n_trees, std::size_t subset_size, std::uint64_t seed,
                                 std::size_t threads) {
  auto codes = forest_classes(x, y);
  if (n_trees == 0) throw Error(ErrorKind::InvalidConfig, "n_trees must be >= 1");
  if (subset_size < 2 || subset_size > x.cols()) {
    throw Error(ErrorKind::InvalidConfig, "subset_size must satisfy 2 <= subset_size <= F");
  }
  const auto labels = codes.encode(y);
  const auto n = x.rows();
  const auto f = x.cols();
  const auto n_classes = codes.classes.size();

  RotationForestModel model;
  model.normaliser = Standardizer::fit(x);
  const auto xn = model.normaliser.transform(x);
  const auto values = xn.values();

  std::vector<std::vector<std::size_t>> rows_of_class(n_classes);
  for (std::size_t r = 0; r < n; ++r) rows_of_class[static_cast<std::size_t>(labels[r])].push_back(r);

  model.trees.resize(n_trees);
  std::vector<std::size_t> fallbacks(n_trees, 0);
  parallel_for(n_trees, threads, [&](std::size_t t) {
    const auto tree_seed = derive_seed(seed, t);
    Rng rng(tree_seed);
    auto& rt = model.trees[t];

    std::vector<std::size_t> features(f);
    std::iota(features.begin(), features.end(), std::size_t{0});
    rng.shuffle(features);
    for (std::size_t start = 0; start < f; start += subset_size) {
      rt.groups.emplace_back(features.begin() + static_cast<std::ptrdiff_t>(start),
                             features.begin() + static_cast<std::ptrdiff_t>(std::min(f, start + subset_size)));
    }

    for (const auto& group : rt.groups) {
      std::vector<std::size_t> pool;
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (rng.coin()) pool.insert(pool.end(), rows_of_class[c].begin(), rows_of_class[c].end());
      }
      if (pool.empty()) {
        const auto c = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n_classes) - 1));
        pool = rows_of_class[c];
      }
      const auto draws = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(pool.size()))));
      const auto s = group.size();
      std::vector<double> sampled(draws * s);
      for (std::size_t d = 0; d < draws; ++d) {
        const auto r = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
        for (std::size_t i = 0; i < s; ++i) sampled[d * s + i] = values[r * f + group[i]];
      }
      std::vector<double> mu(s, 0.0), cov(s * s, 0.0);
      for (std::size_t d = 0; d < draws; ++d)
        for (std::size_t i = 0; i < s; ++i) mu[i] += sampled[d * s + i] / static_cast<double>(draws);
      for (std::size_t d = 0; d < draws; ++d)
        for (std::size_t i = 0; i < s; ++i)
          for (std::size_t j = 0; j < s; ++j)
            cov[i * s + j] += (sampled[d * s + i] - mu[i]) * (sampled[d * s + j] - mu[j]) /
                              static_cast<double>(draws - 1);
      auto [rotation, fallback] = principal_rotation(cov, s);
      fallbacks[t] += fallback;
      rt.rotations.push_back(std::move(rotation));
    }

    const auto rotated = rotate(rt, values, n, f);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    rt.tree = grow({rotated, n, f}, labels, n_classes, all, TreeOptions{0, 2}, derive_seed(tree_seed, 1));
  });
  model.identity_fallbacks = std::accumulate(fallbacks.begin(), fallbacks.end(), std::size_t{0});

  TrainedModel m;
  m.kind = ClassifierKind::RotationForest;
  m.classes = std::move(codes.classes);
  m.n_features = f;
  m.parameters = std::move(model);
  return m;
}

std::vector<int> rotation_forest_votes(const RotationForestModel& model, const FeatureMatrix& x,
                                       std::size_t n_classes) {
  const auto xn = model.normaliser.transform(x);
  std::vector<double> votes(x.rows() * n_classes, 0.0);
  for (const auto& rt : model.trees) {
    const auto rotated = rotate(rt, xn.values(), x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto code = rt.tree.predict({rotated.data() + r * x.cols(), x.cols()});
      votes[r * n_classes + static_cast<std::size_t>(code)] += 1.0;
    }
  }
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    out[r] = argmax_lowest({votes.data() + r * n_classes, n_classes});
  }
  return out;
}

std::vector<int> forest_votes(const ForestModel& model, const FeatureMatrix& x, std::size_t n_classes) {
  std::vector<int> out(x.rows());
  std::vector<double> votes(n_classes);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0.0);
    for (const auto& tree : model.trees) votes[static_cast<std::size_t>(tree.predict(x.row(r)))] += 1.0;
    out[r] = argmax_lowest(votes);
  }
  return out;
}

}  // namespace tsfc::classifiers
