#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tsfc/classifiers.hpp"
#include "tsfc/error.hpp"

namespace tsfc::classifiers {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_eigen(const FeatureMatrix& x) {
  return {x.values().data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols())};
}

void require_rows(const FeatureMatrix& x, std::span<const std::string> y) {
  if (x.rows() != y.size()) throw Error(ErrorKind::RowMismatch, "feature rows and labels differ in count");
  if (x.rows() == 0) throw Error(ErrorKind::InvalidSize, "no training rows");
}

ClassCodes require_classes(std::span<const std::string> y) {
  auto codes = ClassCodes::from(y);
  if (codes.classes.size() < 2) {
    throw Error(ErrorKind::ClassMissing, "training labels contain fewer than two classes");
  }
  return codes;
}

TrainedModel shell(ClassifierKind kind, ClassCodes codes, std::size_t n_features) {
  TrainedModel m;
  m.kind = kind;
  m.classes = std::move(codes.classes);
  m.n_features = n_features;
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const FeatureMatrix& x) {
  const auto n = x.rows();
  const auto f = x.cols();
  std::vector<double> means(f, 0.0), scales(f, 1.0);
  for (std::size_t c = 0; c < f; ++c) {
    const double first = n ? x.at(0, c) : 0.0;
    bool constant = true;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += x.at(r, c);
      constant = constant && x.at(r, c) == first;
    }
    if (constant) {
      means[c] = first;
      continue;
    }
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (x.at(r, c) - mu) * (x.at(r, c) - mu);
    means[c] = mu;
    const double sd = std::sqrt(ss / static_cast<double>(n));
    scales[c] = sd > 0.0 ? sd : 1.0;
  }
  return {std::move(means), std::move(scales)};
}

FeatureMatrix Standardizer::transform(const FeatureMatrix& x) const {
  if (x.cols() != means_.size()) throw Error(ErrorKind::WidthMismatch, "standardizer fitted on another width");
  std::vector<double> values(x.values().begin(), x.values().end());
  const auto f = x.cols();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto c = i % f;
    values[i] = (values[i] - means_[c]) / scales_[c];
  }
  return {x.rows(), x.names(), x.provenance(), std::move(values)};
}

ClassCodes ClassCodes::from(std::span<const std::string> labels) {
  std::set<std::string> s(labels.begin(), labels.end());
  return {{s.begin(), s.end()}};
}

std::vector<int> ClassCodes::encode(std::span<const std::string> labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), l);
    if (it == classes.end() || *it != l) throw Error(ErrorKind::UnknownLabel, "label '" + l + "' not seen in training");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

std::vector<double> default_alphas() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(std::pow(10.0, -3.0 + 6.0 * i / 9.0));
  return out;
}

// ---------------------------------------------------------------------------
// Ridge

TrainedModel fit_ridge(const FeatureMatrix& x, std::span<const std::string> y,
                       std::span<const double> alphas) {
  require_rows(x, y);
  auto codes = require_classes(y);
  if (alphas.empty()) throw Error(ErrorKind::InvalidConfig, "empty alpha grid");
  const auto labels = codes.encode(y);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto f = static_cast<Eigen::Index>(x.cols());
  const auto c = static_cast<Eigen::Index>(codes.classes.size());

  const auto X = as_eigen(x);
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::MatrixXd xc = X.rowwise() - x_mean;
  Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(n, c, -1.0);
  for (Eigen::Index i = 0; i < n; ++i) Y(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const Eigen::MatrixXd yc = Y.rowwise() - y_mean;

  // Work in whichever of the n x n (kernel) or F x F (primal) spaces is smaller.
  const bool dual = n <= f;
  Eigen::MatrixXd basis;     // eigenvectors in sample space (dual) or feature space
  Eigen::VectorXd spectrum;  // eigenvalues, clamped at 0
  Eigen::MatrixXd projected; // Q (dual) or Xc V (primal): n x r
  if (dual) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xc * xc.transpose());
    basis = es.eigenvectors();
    spectrum = es.eigenvalues().cwiseMax(0.0);
    projected = basis;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xc.transpose() * xc);
    basis = es.eigenvectors();
    spectrum = es.eigenvalues().cwiseMax(0.0);
    projected = xc * basis;
  }
  const Eigen::MatrixXd proj_y = projected.transpose() * yc;  // r x C

  RidgeModel model;
  double best_error = std::numeric_limits<double>::infinity();
  std::size_t best = alphas.size();
  const Eigen::MatrixXd proj_sq = projected.array().square().matrix();
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    const double alpha = alphas[a];
    // shrink factors for the fitted values
    const Eigen::VectorXd shrink = dual ? Eigen::VectorXd(spectrum.array() / (spectrum.array() + alpha))
                                        : Eigen::VectorXd(1.0 / (spectrum.array() + alpha));
    const Eigen::MatrixXd fitted = projected * shrink.asDiagonal() * proj_y;
    const Eigen::VectorXd hat = (proj_sq * shrink).array() + 1.0 / static_cast<double>(n);
    double err = 0.0;
    bool finite = true;
    for (Eigen::Index i = 0; i < n && finite; ++i) {
      const double denom = 1.0 - hat(i);
      if (!(denom > 1e-12)) {
        finite = false;
        break;
      }
      err += ((yc.row(i) - fitted.row(i)) / denom).squaredNorm();
    }
    err /= static_cast<double>(n * c);
    if (!finite || !std::isfinite(err)) {
      model.loo_error.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    model.loo_error.push_back(err);
    if (err < best_error) {
      best_error = err;
      best = a;
    }
  }
  if (best == alphas.size()) {
    throw Error(ErrorKind::SingularSystem, "no alpha in the grid gave a well-posed ridge system");
  }
  model.alpha = alphas[best];
  const Eigen::VectorXd inv = (1.0 / (spectrum.array() + model.alpha)).matrix();
  const Eigen::MatrixXd w = dual ? Eigen::MatrixXd(xc.transpose() * (basis * inv.asDiagonal() * proj_y))
                                 : Eigen::MatrixXd(basis * inv.asDiagonal() * proj_y);
  const Eigen::RowVectorXd b = y_mean - x_mean * w;

  model.coef.resize(static_cast<std::size_t>(f * c));
  for (Eigen::Index i = 0; i < f; ++i)
    for (Eigen::Index j = 0; j < c; ++j) model.coef[static_cast<std::size_t>(i * c + j)] = w(i, j);
  model.intercept.assign(b.data(), b.data() + c);

  auto m = shell(ClassifierKind::Ridge, std::move(codes), x.cols());
  m.parameters = std::move(model);
  return m;
}

// ---------------------------------------------------------------------------
// Logistic regression

namespace {

struct LogisticProblem {
  Eigen::Map<const RowMatrix> x;
  Eigen::MatrixXd onehot;
  double l2 = 0.0;  // coefficient on ||W||^2 / 2
  double l1 = 0.0;  // coefficient on ||W||_1

  // Smooth part: mean cross-entropy + l2/2 ||W||^2. Fills probabilities when asked.
  double smooth(const Eigen::MatrixXd& w, const Eigen::RowVectorXd& b, Eigen::MatrixXd* prob) const {
    Eigen::MatrixXd z = (x * w).rowwise() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double zmax = z.row(i).maxCoeff();
      z.row(i).array() -= zmax;
      const double lse = std::log(z.row(i).array().exp().sum());
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        if (onehot(i, j) > 0.0) loss -= z(i, j) - lse;
      }
      if (prob) z.row(i) = (z.row(i).array() - lse).exp();
    }
    if (prob) *prob = std::move(z);
    return loss / static_cast<double>(x.rows()) + 0.5 * l2 * w.squaredNorm();
  }

  double objective(const Eigen::MatrixXd& w, const Eigen::RowVectorXd& b) const {
    return smooth(w, b, nullptr) + l1 * w.lpNorm<1>();
  }
};

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

TrainedModel fit_logistic(const FeatureMatrix& x, std::span<const std::string> y,
                          const LogisticOptions& options) {
  require_rows(x, y);
  auto codes = require_classes(y);
  const auto labels = codes.encode(y);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto f = static_cast<Eigen::Index>(x.cols());
  const auto c = static_cast<Eigen::Index>(codes.classes.size());

  const double lambda = options.lambda > 0.0 ? options.lambda : 1.0 / static_cast<double>(n);
  const double rho = options.penalty == Penalty::ElasticNet ? std::clamp(options.l1_ratio, 0.0, 1.0) : 0.0;
  LogisticProblem problem{as_eigen(x), Eigen::MatrixXd::Zero(n, c), lambda * (1.0 - rho), lambda * rho};
  for (Eigen::Index i = 0; i < n; ++i) problem.onehot(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(f, c);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(c);
  LogisticModel model;
  Eigen::MatrixXd prob;
  double g = problem.smooth(w, b, &prob);
  double obj = g + problem.l1 * w.lpNorm<1>();
  model.objective.push_back(obj);
  double step = 1.0;

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::MatrixXd resid = prob - problem.onehot;
    const Eigen::MatrixXd grad_w = problem.x.transpose() * resid / static_cast<double>(n) + problem.l2 * w;
    const Eigen::RowVectorXd grad_b = resid.colwise().mean();

    step = std::min(step * 2.0, 1e6);
    Eigen::MatrixXd w_next;
    Eigen::RowVectorXd b_next;
    double g_next = 0.0;
    bool accepted = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      w_next = (w - step * grad_w).unaryExpr([&](double v) { return soft_threshold(v, step * problem.l1); });
      b_next = b - step * grad_b;
      g_next = problem.smooth(w_next, b_next, nullptr);
      const double dw = (w_next - w).squaredNorm() + (b_next - b).squaredNorm();
      const double lin = ((w_next - w).cwiseProduct(grad_w)).sum() + ((b_next - b).cwiseProduct(grad_b)).sum();
      if (g_next <= g + lin + dw / (2.0 * step) + 1e-15 * std::abs(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    const double obj_next = g_next + problem.l1 * w_next.lpNorm<1>();
    if (!accepted || !(obj_next <= obj)) {
      // no further descent is representable at this precision
      model.converged = true;
      break;
    }
    const double mapping = std::sqrt((w_next - w).squaredNorm() + (b_next - b).squaredNorm()) / step;
    w = std::move(w_next);
    b = std::move(b_next);
    g = problem.smooth(w, b, &prob);
    obj = obj_next;
    model.objective.push_back(obj);
    model.iterations = iter + 1;
    if (mapping <= options.tol) {
      model.converged = true;
      break;
    }
  }

  model.coef.resize(static_cast<std::size_t>(f * c));
  for (Eigen::Index i = 0; i < f; ++i)
    for (Eigen::Index j = 0; j < c; ++j) model.coef[static_cast<std::size_t>(i * c + j)] = w(i, j);
  model.intercept.assign(b.data(), b.data() + c);

  auto m = shell(ClassifierKind::Logistic, std::move(codes), x.cols());
  m.parameters = std::move(model);
  return m;
}

// ---------------------------------------------------------------------------
// 1-NN

TrainedModel fit_1nn(const FeatureMatrix& x, std::span<const std::string> y) {
  require_rows(x, y);
  auto codes = ClassCodes::from(y);
  NearestNeighborModel model;
  model.points.assign(x.values().begin(), x.values().end());
  model.codes = codes.encode(y);
  auto m = shell(ClassifierKind::NearestNeighbor, std::move(codes), x.cols());
  m.parameters = std::move(model);
  return m;
}

}  // namespace tsfc::classifiers
