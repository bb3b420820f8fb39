#include <json.hpp>

#include <charconv>
#include <cmath>
#include <limits>

#include "classifiers_internal.hpp"
#include "tsfc/classifiers.hpp"
#include "tsfc/error.hpp"

namespace tsfc::classifiers {

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;

std::vector<int> linear_predict(std::span<const double> coef, std::span<const double> intercept,
                                const FeatureMatrix& x) {
  const auto c = intercept.size();
  std::vector<int> out(x.rows());
  std::vector<double> scores(c);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::copy(intercept.begin(), intercept.end(), scores.begin());
    const auto row = x.row(r);
    for (std::size_t f = 0; f < row.size(); ++f) {
      const double v = row[f];
      for (std::size_t j = 0; j < c; ++j) scores[j] += v * coef[f * c + j];
    }
    int best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (scores[j] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    out[r] = best;
  }
  return out;
}

std::vector<int> nearest_predict(const NearestNeighborModel& m, const FeatureMatrix& x) {
  const auto f = x.cols();
  const auto n = m.codes.size();
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0.0;
      for (std::size_t k = 0; k < f; ++k) {
        const double diff = row[k] - m.points[i * f + k];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        best_idx = i;
      }
    }
    out[r] = m.codes[best_idx];
  }
  return out;
}

// JSON has no NaN; ridge LOO errors can be NaN for rejected alphas.
json number_array(const std::vector<double>& v) {
  json out = json::array();
  for (const double d : v) out.push_back(std::isfinite(d) ? json(d) : json(nullptr));
  return out;
}

std::vector<double> read_numbers(const json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(e.is_null() ? std::numeric_limits<double>::quiet_NaN() : e.get<double>());
  return out;
}

json tree_to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       dist = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    dist.push_back(n.distribution);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"distribution", dist}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  const auto& feature = j.at("feature");
  t.nodes.resize(feature.size());
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = feature[i].get<int>();
    n.threshold = j.at("threshold")[i].get<double>();
    n.left = j.at("left")[i].get<int>();
    n.right = j.at("right")[i].get<int>();
    n.distribution = j.at("distribution")[i].get<std::vector<double>>();
  }
  return t;
}

json standardizer_to_json(const Standardizer& s) {
  return {{"means", s.means()}, {"scales", s.scales()}};
}

Standardizer standardizer_from_json(const json& j) {
  return {j.at("means").get<std::vector<double>>(), j.at("scales").get<std::vector<double>>()};
}

ClassifierKind kind_from_string(std::string_view s) {
  for (const auto k : {ClassifierKind::Ridge, ClassifierKind::Logistic, ClassifierKind::NearestNeighbor,
                       ClassifierKind::RandomForest, ClassifierKind::RotationForest}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown classifier kind '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::Ridge: return "ridge";
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::NearestNeighbor: return "1nn";
    case ClassifierKind::RandomForest: return "random_forest";
    case ClassifierKind::RotationForest: return "rotation_forest";
  }
  return "unknown";
}

std::vector<int> TrainedModel::predict_codes(const FeatureMatrix& x) const {
  if (x.cols() != n_features) {
    throw Error(ErrorKind::WidthMismatch, "model expects " + std::to_string(n_features) + " columns, got " +
                                              std::to_string(x.cols()));
  }
  const FeatureMatrix scaled = standardizer ? standardizer->transform(x) : FeatureMatrix{};
  const FeatureMatrix& input = standardizer ? scaled : x;
  return std::visit(
      [&](const auto& p) -> std::vector<int> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RidgeModel> || std::is_same_v<T, LogisticModel>) {
          return linear_predict(p.coef, p.intercept, input);
        } else if constexpr (std::is_same_v<T, NearestNeighborModel>) {
          return nearest_predict(p, input);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return forest_votes(p, input, classes.size());
        } else {
          return rotation_forest_votes(p, input, classes.size());
        }
      },
      parameters);
}

std::vector<std::string> TrainedModel::predict(const FeatureMatrix& x) const {
  const auto codes = predict_codes(x);
  std::vector<std::string> out;
  out.reserve(codes.size());
  for (const auto c : codes) out.push_back(classes[static_cast<std::size_t>(c)]);
  return out;
}

std::string ClassifierSpec::name() const {
  switch (kind) {
    case ClassifierKind::Ridge: return "ridge";
    case ClassifierKind::Logistic:
      return logistic.penalty == Penalty::L2 ? "logistic_l2" : "logistic_elasticnet";
    case ClassifierKind::NearestNeighbor: return "1nn";
    case ClassifierKind::RandomForest: return "rf" + std::to_string(n_trees);
    case ClassifierKind::RotationForest: return n_trees == 200 ? "rotf" : "rotf" + std::to_string(n_trees);
  }
  return "unknown";
}

bool ClassifierSpec::standardizes() const noexcept {
  return kind == ClassifierKind::Ridge || kind == ClassifierKind::Logistic ||
         kind == ClassifierKind::NearestNeighbor;
}

ClassifierSpec parse_classifier(std::string_view name) {
  ClassifierSpec spec;
  auto trailing_count = [&](std::string_view prefix, std::size_t fallback) {
    const auto digits = name.substr(prefix.size());
    if (digits.empty()) return fallback;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || v == 0) {
      throw Error(ErrorKind::InvalidConfig, "bad classifier name '" + std::string(name) + "'");
    }
    return v;
  };
  if (name == "ridge") {
    spec.kind = ClassifierKind::Ridge;
  } else if (name == "logistic_l2" || name == "logistic") {
    spec.kind = ClassifierKind::Logistic;
  } else if (name == "logistic_elasticnet") {
    spec.kind = ClassifierKind::Logistic;
    spec.logistic.penalty = Penalty::ElasticNet;
  } else if (name == "1nn") {
    spec.kind = ClassifierKind::NearestNeighbor;
  } else if (name.starts_with("rotf")) {
    spec.kind = ClassifierKind::RotationForest;
    spec.n_trees = trailing_count("rotf", 200);
  } else if (name.starts_with("rf")) {
    spec.kind = ClassifierKind::RandomForest;
    spec.n_trees = trailing_count("rf", 100);
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown classifier '" + std::string(name) + "'");
  }
  return spec;
}

TrainedModel fit(const ClassifierSpec& spec, const FeatureMatrix& x, std::span<const std::string> y,
                 std::uint64_t seed) {
  std::optional<Standardizer> standardizer;
  FeatureMatrix scaled;
  if (spec.standardizes()) {
    standardizer = Standardizer::fit(x);
    scaled = standardizer->transform(x);
  }
  const FeatureMatrix& input = standardizer ? scaled : x;
  TrainedModel model;
  switch (spec.kind) {
    case ClassifierKind::Ridge: model = fit_ridge(input, y, spec.alphas); break;
    case ClassifierKind::Logistic: model = fit_logistic(input, y, spec.logistic); break;
    case ClassifierKind::NearestNeighbor: model = fit_1nn(input, y); break;
    case ClassifierKind::RandomForest:
      model = fit_random_forest(input, y, spec.n_trees, seed, spec.threads);
      break;
    case ClassifierKind::RotationForest:
      model = fit_rotation_forest(input, y, spec.n_trees, std::min(spec.subset_size, input.cols()), seed,
                                  spec.threads);
      break;
  }
  model.standardizer = std::move(standardizer);
  return model;
}

double accuracy(std::span<const std::string> predicted, std::span<const std::string> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::WidthMismatch, "prediction and truth lengths differ");
  }
  if (truth.empty()) throw Error(ErrorKind::InvalidSize, "accuracy of an empty prediction");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::string save_model(const TrainedModel& model) {
  json j;
  j["format"] = "tsfc-model";
  j["version"] = kModelVersion;
  j["kind"] = std::string(to_string(model.kind));
  j["classes"] = model.classes;
  j["n_features"] = model.n_features;
  j["standardizer"] = model.standardizer ? standardizer_to_json(*model.standardizer) : json(nullptr);
  json p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RidgeModel>) {
          p = {{"alpha", m.alpha}, {"coef", m.coef}, {"intercept", m.intercept}, {"loo_error", number_array(m.loo_error)}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          p = {{"coef", m.coef},       {"intercept", m.intercept},   {"converged", m.converged},
               {"iterations", m.iterations}, {"objective", m.objective}};
        } else if constexpr (std::is_same_v<T, NearestNeighborModel>) {
          p = {{"points", m.points}, {"codes", m.codes}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
          p = {{"trees", trees}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) {
            trees.push_back({{"groups", t.groups}, {"rotations", t.rotations}, {"tree", tree_to_json(t.tree)}});
          }
          p = {{"normaliser", standardizer_to_json(m.normaliser)},
               {"identity_fallbacks", m.identity_fallbacks},
               {"trees", trees}};
        }
      },
      model.parameters);
  j["parameters"] = std::move(p);
  return j.dump();
}

TrainedModel load_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, std::string("model text is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "tsfc-model") throw Error(ErrorKind::Io, "not a tsfc model");
  if (j.value("version", 0) != kModelVersion) {
    throw Error(ErrorKind::Io, "unsupported model version " + std::to_string(j.value("version", 0)));
  }
  TrainedModel m;
  m.kind = kind_from_string(j.at("kind").get<std::string>());
  m.classes = j.at("classes").get<std::vector<std::string>>();
  m.n_features = j.at("n_features").get<std::size_t>();
  if (!j.at("standardizer").is_null()) m.standardizer = standardizer_from_json(j.at("standardizer"));
  const auto& p = j.at("parameters");
  switch (m.kind) {
    case ClassifierKind::Ridge: {
      RidgeModel r;
      r.alpha = p.at("alpha").get<double>();
      r.coef = p.at("coef").get<std::vector<double>>();
      r.intercept = p.at("intercept").get<std::vector<double>>();
      r.loo_error = read_numbers(p.at("loo_error"));
      m.parameters = std::move(r);
      break;
    }
    case ClassifierKind::Logistic: {
      LogisticModel l;
      l.coef = p.at("coef").get<std::vector<double>>();
      l.intercept = p.at("intercept").get<std::vector<double>>();
      l.converged = p.at("converged").get<bool>();
      l.iterations = p.at("iterations").get<std::size_t>();
      l.objective = p.at("objective").get<std::vector<double>>();
      m.parameters = std::move(l);
      break;
    }
    case ClassifierKind::NearestNeighbor: {
      NearestNeighborModel nn;
      nn.points = p.at("points").get<std::vector<double>>();
      nn.codes = p.at("codes").get<std::vector<int>>();
      m.parameters = std::move(nn);
      break;
    }
    case ClassifierKind::RandomForest: {
      ForestModel f;
      for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
      m.parameters = std::move(f);
      break;
    }
    case ClassifierKind::RotationForest: {
      RotationForestModel r;
      r.normaliser = standardizer_from_json(p.at("normaliser"));
      r.identity_fallbacks = p.at("identity_fallbacks").get<std::size_t>();
      for (const auto& t : p.at("trees")) {
        RotationTree rt;
        rt.groups = t.at("groups").get<std::vector<std::vector<std::size_t>>>();
        rt.rotations = t.at("rotations").get<std::vector<std::vector<double>>>();
        rt.tree = tree_from_json(t.at("tree"));
        r.trees.push_back(std::move(rt));
      }
      m.parameters = std::move(r);
      break;
    }
  }
  return m;
}

}  // namespace tsfc::classifiers
