#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tsfc/feature_matrix.hpp"

namespace tsfc::classifiers {

/// Per-column z-scoring fitted on train; zero-variance columns map to 0.
class Standardizer {
 public:
  static Standardizer fit(const FeatureMatrix& x);
  FeatureMatrix transform(const FeatureMatrix& x) const;

  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& scales() const noexcept { return scales_; }

  Standardizer() = default;
  Standardizer(std::vector<double> means, std::vector<double> scales)
      : means_(std::move(means)), scales_(std::move(scales)) {}

 private:
  std::vector<double> means_;
  std::vector<double> scales_;
};

/// Sorted class names; codes are indices into it.
struct ClassCodes {
  std::vector<std::string> classes;

  static ClassCodes from(std::span<const std::string> labels);
  std::vector<int> encode(std::span<const std::string> labels) const;
};

enum class ClassifierKind { Ridge, Logistic, NearestNeighbor, RandomForest, RotationForest };
enum class Penalty { L2, ElasticNet };

std::string_view to_string(ClassifierKind kind) noexcept;

struct RidgeModel {
  double alpha = 1.0;
  std::vector<double> coef;       // F x C row-major
  std::vector<double> intercept;  // C
  std::vector<double> loo_error;  // mean squared LOO residual per grid alpha
};

struct LogisticModel {
  std::vector<double> coef;  // F x C row-major
  std::vector<double> intercept;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> objective;  // objective after every accepted step
};

struct NearestNeighborModel {
  std::vector<double> points;  // n x F row-major
  std::vector<int> codes;
};

/// Binary CART tree; a node with feature < 0 is a leaf.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> distribution;  // class counts at the node
  };
  std::vector<Node> nodes;

  int predict(std::span<const double> row) const;
  std::size_t leaf_count() const;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
};

struct RotationTree {
  std::vector<std::vector<std::size_t>> groups;  // feature indices per block
  std::vector<std::vector<double>> rotations;    // s x s row-major per block; columns are axes
  DecisionTree tree;
};

struct RotationForestModel {
  Standardizer normaliser;
  std::vector<RotationTree> trees;
  std::size_t identity_fallbacks = 0;  // blocks whose covariance was degenerate
};

using ModelParameters =
    std::variant<RidgeModel, LogisticModel, NearestNeighborModel, ForestModel, RotationForestModel>;

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::Ridge;
  std::vector<std::string> classes;
  std::size_t n_features = 0;
  std::optional<Standardizer> standardizer;
  ModelParameters parameters;

  std::vector<int> predict_codes(const FeatureMatrix& x) const;
  std::vector<std::string> predict(const FeatureMatrix& x) const;
};

/// log-spaced 10^-3 .. 10^3, ten values.
std::vector<double> default_alphas();

/// One-vs-rest ridge on +-1 targets with the alpha minimising the closed-form
/// leave-one-out squared error. Expects standardized input.
TrainedModel fit_ridge(const FeatureMatrix& x, std::span<const std::string> y,
                       std::span<const double> alphas);

struct LogisticOptions {
  Penalty penalty = Penalty::L2;
  double lambda = 0.0;  // <= 0 selects 1/n
  double l1_ratio = 0.5;
  double tol = 1e-4;
  std::size_t max_iter = 1000;
};

/// Multinomial logistic regression by proximal gradient descent with
/// backtracking (monotone objective). Non-convergence is reported in the
/// model, not thrown.
TrainedModel fit_logistic(const FeatureMatrix& x, std::span<const std::string> y,
                          const LogisticOptions& options);

/// Euclidean 1-NN; ties go to the lowest training index.
TrainedModel fit_1nn(const FeatureMatrix& x, std::span<const std::string> y);

struct TreeOptions {
  std::size_t max_features = 0;  // 0: all features
  std::size_t min_samples_split = 2;
};

/// Gini CART grown to purity on the given (possibly repeated) sample rows.
DecisionTree grow_tree(const FeatureMatrix& x, std::span<const int> codes, std::size_t n_classes,
                       std::span<const std::size_t> sample, const TreeOptions& options,
                       std::uint64_t seed);

TrainedModel fit_random_forest(const FeatureMatrix& x, std::span<const std::string> y,
                               std::size_t n_trees, std::uint64_t seed, std::size_t threads = 1);

struct EigenResult {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // s x s row-major, column j pairs with values[j]
  bool converged = false;
  std::size_t sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric s x s matrix, iterated
/// until the off-diagonal Frobenius norm is <= tol * max(1, ||A||_F).
EigenResult jacobi_eigen(std::span<const double> symmetric, std::size_t s, double tol = 1e-10,
                         std::size_t max_sweeps = 100);

/// Principal axes of a block's covariance; identity when the covariance is
/// zero or the eigensolver fails (second member reports the fallback).
std::pair<std::vector<double>, bool> principal_rotation(std::span<const double> covariance, std::size_t s);

TrainedModel fit_rotation_forest(const FeatureMatrix& x, std::span<const std::string> y,
                                 std::size_t n_trees, std::size_t subset_size, std::uint64_t seed,
                                 std::size_t threads = 1);

/// Classifier choice plus its hyperparameters.
struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::RandomForest;
  std::vector<double> alphas = default_alphas();
  LogisticOptions logistic;
  std::size_t n_trees = 100;
  std::size_t subset_size = 3;
  std::size_t threads = 1;

  /// Stable short name, e.g. "rf100", "logistic_l2", "rotf".
  std::string name() const;
  /// Ridge, logistic and 1-NN consume standardized features.
  bool standardizes() const noexcept;
};

/// Accepts ridge, logistic_l2, logistic_elasticnet, 1nn, rf100, rf500, rf<N>, rotf, rotf<N>.
ClassifierSpec parse_classifier(std::string_view name);

/// Fits the classifier, standardizing first for ridge, logistic and 1-NN.
TrainedModel fit(const ClassifierSpec& spec, const FeatureMatrix& x, std::span<const std::string> y,
                 std::uint64_t seed);

/// Fraction of equal entries. Throws WidthMismatch on length mismatch.
double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth);

/// Versioned JSON text; load(save(m)) predicts identically to m.
std::string save_model(const TrainedModel& model);
TrainedModel load_model(std::string_view text);

}  // namespace tsfc::classifiers
