#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "triclass/learners/ensembles.hpp"
#include "triclass/learners/linear.hpp"
#include "triclass/learners/mlp.hpp"
#include "triclass/learners/naive_bayes.hpp"
#include "triclass/learners/objective.hpp"
#include "triclass/matrix.hpp"
#include "triclass/random.hpp"

namespace triclass {

enum class LearnerKind : std::uint8_t {
  naive_bayes,
  linear_svm,
  random_forest,
  gbm,
  adaboost,
  mlp,
  logistic_regression,
};

inline constexpr std::array<LearnerKind, 7> kAllLearnerKinds{
    LearnerKind::naive_bayes, LearnerKind::linear_svm, LearnerKind::random_forest, LearnerKind::gbm,
    LearnerKind::adaboost,    LearnerKind::mlp,        LearnerKind::logistic_regression};

/// The six base learners of the stacked system, in ordinal order.
inline constexpr std::array<LearnerKind, 6> kBaseLearnerKinds{
    LearnerKind::naive_bayes, LearnerKind::linear_svm, LearnerKind::random_forest,
    LearnerKind::gbm,         LearnerKind::adaboost,   LearnerKind::mlp};

inline std::string_view kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::naive_bayes: return "naive_bayes";
    case LearnerKind::linear_svm: return "linear_svm";
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::gbm: return "gbm";
    case LearnerKind::adaboost: return "adaboost";
    case LearnerKind::mlp: return "mlp";
    case LearnerKind::logistic_regression: return "logistic_regression";
  }
  throw std::invalid_argument("unknown learner kind");
}

inline LearnerKind parse_kind(std::string_view name) {
  for (auto k : kAllLearnerKinds) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown learner kind: " + std::string(name));
}

inline bool is_stochastic(LearnerKind kind) {
  return kind == LearnerKind::linear_svm || kind == LearnerKind::random_forest || kind == LearnerKind::mlp;
}

struct Hyperparameters {
  NaiveBayesParams naive_bayes;
  LinearSvmParams linear_svm;
  RandomForestParams random_forest;
  GbmParams gbm;
  AdaBoostParams adaboost;
  MlpParams mlp;
  LogisticParams logistic_regression;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::naive_bayes;
  Hyperparameters params;
  std::uint64_t seed = 0;
};

/// Seed of base learner `ordinal` within an experiment.
inline std::uint64_t learner_seed(std::uint64_t experiment_seed, std::size_t ordinal) {
  return experiment_seed * 1000 + ordinal;
}

/// The six default base-learner specs with their derived seeds.
inline std::vector<LearnerSpec> default_base_specs(std::uint64_t experiment_seed) {
  std::vector<LearnerSpec> specs;
  for (std::size_t i = 0; i < kBaseLearnerKinds.size(); ++i) {
    specs.push_back({kBaseLearnerKinds[i], {}, learner_seed(experiment_seed, i)});
  }
  return specs;
}

inline nlohmann::json hyperparameters_json(LearnerKind kind, const Hyperparameters& hp) {
  switch (kind) {
    case LearnerKind::naive_bayes: return {{"alpha", hp.naive_bayes.alpha}};
    case LearnerKind::linear_svm: return {{"lambda", hp.linear_svm.lambda}, {"epochs", hp.linear_svm.epochs}};
    case LearnerKind::random_forest:
      return {{"trees", hp.random_forest.trees},
              {"max_depth", hp.random_forest.max_depth},
              {"max_features", hp.random_forest.max_features},
              {"bootstrap", hp.random_forest.bootstrap},
              {"max_bins", hp.random_forest.max_bins}};
    case LearnerKind::gbm:
      return {{"rounds", hp.gbm.rounds},
              {"max_depth", hp.gbm.max_depth},
              {"learning_rate", hp.gbm.learning_rate},
              {"max_bins", hp.gbm.max_bins}};
    case LearnerKind::adaboost: return {{"rounds", hp.adaboost.rounds}, {"max_bins", hp.adaboost.max_bins}};
    case LearnerKind::mlp:
      return {{"hidden", hp.mlp.hidden},
              {"batch_size", hp.mlp.batch_size},
              {"learning_rate", hp.mlp.learning_rate},
              {"momentum", hp.mlp.momentum},
              {"epochs", hp.mlp.epochs}};
    case LearnerKind::logistic_regression:
      return {{"lambda", hp.logistic_regression.lambda},
              {"tolerance", hp.logistic_regression.tolerance},
              {"max_iterations", hp.logistic_regression.max_iterations}};
  }
  throw std::invalid_argument("unknown learner kind");
}

inline Hyperparameters hyperparameters_from_json(LearnerKind kind, const nlohmann::json& j) {
  Hyperparameters hp;
  switch (kind) {
    case LearnerKind::naive_bayes: hp.naive_bayes.alpha = j.at("alpha"); break;
    case LearnerKind::linear_svm:
      hp.linear_svm.lambda = j.at("lambda");
      hp.linear_svm.epochs = j.at("epochs");
      break;
    case LearnerKind::random_forest:
      hp.random_forest.trees = j.at("trees");
      hp.random_forest.max_depth = j.at("max_depth");
      hp.random_forest.max_features = j.at("max_features");
      hp.random_forest.bootstrap = j.at("bootstrap");
      hp.random_forest.max_bins = j.at("max_bins");
      break;
    case LearnerKind::gbm:
      hp.gbm.rounds = j.at("rounds");
      hp.gbm.max_depth = j.at("max_depth");
      hp.gbm.learning_rate = j.at("learning_rate");
      hp.gbm.max_bins = j.at("max_bins");
      break;
    case LearnerKind::adaboost:
      hp.adaboost.rounds = j.at("rounds");
      hp.adaboost.max_bins = j.at("max_bins");
      break;
    case LearnerKind::mlp:
      hp.mlp.hidden = j.at("hidden");
      hp.mlp.batch_size = j.at("batch_size");
      hp.mlp.learning_rate = j.at("learning_rate");
      hp.mlp.momentum = j.at("momentum");
      hp.mlp.epochs = j.at("epochs");
      break;
    case LearnerKind::logistic_regression:
      hp.logistic_regression.lambda = j.at("lambda");
      hp.logistic_regression.tolerance = j.at("tolerance");
      hp.logistic_regression.max_iterations = j.at("max_iterations");
      break;
  }
  return hp;
}

/// Predicts its single training class with probability 1.
struct ConstantModel {
  nlohmann::json to_json() const { return nlohmann::json::object(); }
  friend bool operator==(const ConstantModel&, const ConstantModel&) = default;
};

inline constexpr int kLearnerFormatVersion = 1;

/// A trained learner. Probabilities are over `classes()`, the sorted set of
/// labels seen in training.
class LearnerModel {
 public:
  using Parameters =
      std::variant<ConstantModel, NaiveBayesModel, LinearModel, ForestModel, GbmModel, AdaBoostModel, MlpModel>;

  LearnerModel() = default;
  LearnerModel(LearnerSpec spec, std::vector<int> classes, std::size_t input_dim, Parameters params)
      : spec_(std::move(spec)), classes_(std::move(classes)), input_dim_(input_dim), params_(std::move(params)) {}

  LearnerKind kind() const { return spec_.kind; }
  const LearnerSpec& spec() const { return spec_; }
  const std::vector<int>& classes() const { return classes_; }
  std::size_t input_dim() const { return input_dim_; }
  bool is_constant() const { return std::holds_alternative<ConstantModel>(params_); }
  const Parameters& parameters() const { return params_; }

  DenseMatrix predict_proba(const FeatureMatrix& x) const {
    if (x.cols() != input_dim_) {
      throw std::invalid_argument("predict_proba: row width " + std::to_string(x.cols()) + " != model input " +
                                  std::to_string(input_dim_));
    }
    return std::visit(
        [&](const auto& p) -> DenseMatrix {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ConstantModel>) {
            return DenseMatrix(x.rows(), 1, 1.0);
          } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
            return predict_naive_bayes(p, x);
          } else if constexpr (std::is_same_v<T, LinearModel>) {
            return predict_linear(p, x);
          } else if constexpr (std::is_same_v<T, ForestModel>) {
            return predict_forest(p, x);
          } else if constexpr (std::is_same_v<T, GbmModel>) {
            return predict_gbm(p, x);
          } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
            return predict_adaboost(p, x);
          } else {
            return predict_mlp(p, x);
          }
        },
        params_);
  }

  /// Argmax class label per row (ties to the smaller label).
  std::vector<int> predict(const FeatureMatrix& x) const {
    const DenseMatrix p = predict_proba(x);
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = classes_[argmax(p.row(i))];
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json params = std::visit([](const auto& p) { return p.to_json(); }, params_);
    return {{"format", "learner"},
            {"format_version", kLearnerFormatVersion},
            {"kind", kind_name(spec_.kind)},
            {"hyperparameters", hyperparameters_json(spec_.kind, spec_.params)},
            {"seed", spec_.seed},
            {"classes", classes_},
            {"input_dim", input_dim_},
            {"constant", is_constant()},
            {"parameters", std::move(params)}};
  }

  static LearnerModel from_json(const nlohmann::json& j) {
    if (j.at("format") != "learner") throw std::runtime_error("not a learner model");
    if (j.at("format_version").get<int>() != kLearnerFormatVersion) {
      throw std::runtime_error("learner model format version mismatch");
    }
    LearnerSpec spec;
    spec.kind = parse_kind(j.at("kind").get<std::string>());
    spec.params = hyperparameters_from_json(spec.kind, j.at("hyperparameters"));
    spec.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("parameters");
    Parameters params;
    if (j.at("constant").get<bool>()) {
      params = ConstantModel{};
    } else {
      switch (spec.kind) {
        case LearnerKind::naive_bayes: params = NaiveBayesModel::from_json(p); break;
        case LearnerKind::linear_svm:
        case LearnerKind::logistic_regression: params = LinearModel::from_json(p); break;
        case LearnerKind::random_forest: params = ForestModel::from_json(p); break;
        case LearnerKind::gbm: params = GbmModel::from_json(p); break;
        case LearnerKind::adaboost: params = AdaBoostModel::from_json(p); break;
        case LearnerKind::mlp: params = MlpModel::from_json(p); break;
      }
    }
    return LearnerModel(spec, j.at("classes").get<std::vector<int>>(), j.at("input_dim").get<std::size_t>(),
                        std::move(params));
  }

  friend bool operator==(const LearnerModel& a, const LearnerModel& b) {
    return a.spec_.kind == b.spec_.kind && a.spec_.seed == b.spec_.seed && a.classes_ == b.classes_ &&
           a.input_dim_ == b.input_dim_ && a.params_ == b.params_;
  }

 private:
  LearnerSpec spec_;
  std::vector<int> classes_;
  std::size_t input_dim_ = 0;
  Parameters params_;
};

/// Trains one learner. Labels may be any integers; they are re-indexed to
/// the sorted set of distinct values internally.
inline LearnerModel train_learner(const LearnerSpec& spec, const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("train_learner: " + std::to_string(x.rows()) + " rows but " +
                                std::to_string(y.size()) + " labels");
  }
  if (x.rows() == 0) throw std::invalid_argument("train_learner: empty training set");
  if (x.has_non_finite()) throw std::invalid_argument("train_learner: non-finite feature value");

  std::vector<int> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() == 1) return LearnerModel(spec, classes, x.cols(), ConstantModel{});

  std::vector<int> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    idx[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
  }
  const std::size_t k = classes.size();
  const auto& hp = spec.params;
  LearnerModel::Parameters params;
  switch (spec.kind) {
    case LearnerKind::naive_bayes: params = train_naive_bayes(hp.naive_bayes, x, idx, k); break;
    case LearnerKind::linear_svm: params = train_linear_svm(hp.linear_svm, x, idx, k, spec.seed); break;
    case LearnerKind::random_forest: params = train_random_forest(hp.random_forest, x, idx, k, spec.seed); break;
    case LearnerKind::gbm: params = train_gbm(hp.gbm, x, idx, k); break;
    case LearnerKind::adaboost: params = train_adaboost(hp.adaboost, x, idx, k); break;
    case LearnerKind::mlp: params = train_mlp(hp.mlp, x, idx, k, spec.seed); break;
    case LearnerKind::logistic_regression: params = train_logistic(hp.logistic_regression, x, idx, k); break;
  }
  return LearnerModel(spec, std::move(classes), x.cols(), std::move(params));
}

/// Analytic-vs-numeric gradient agreement for the gradient-trained kinds,
/// at random parameters seeded by `spec.seed`.
inline GradientCheckResult gradient_check(const LearnerSpec& spec, const FeatureMatrix& x, std::span<const int> y,
                                          std::size_t classes) {
  Rng rng(spec.seed);
  switch (spec.kind) {
    case LearnerKind::logistic_regression: {
      const LogisticObjective obj(x, y, classes, spec.params.logistic_regression.lambda);
      std::vector<double> p(obj.dimension());
      for (double& v : p) v = rng.uniform(-1.0, 1.0);
      return check_gradient(obj, p);
    }
    case LearnerKind::linear_svm: {
      const SvmObjective obj(x, y, classes, spec.params.linear_svm.lambda);
      std::vector<double> p(obj.dimension());
      for (double& v : p) v = rng.uniform(-1.0, 1.0);
      return check_gradient(obj, p);
    }
    case LearnerKind::mlp: {
      const MlpObjective obj(x, y, spec.params.mlp.hidden, classes);
      std::vector<double> p = init_mlp(x.cols(), spec.params.mlp.hidden, classes, rng);
      // Non-zero biases so the check also exercises them.
      for (std::size_t i = x.cols() * spec.params.mlp.hidden; i < p.size(); ++i) p[i] += rng.uniform(-0.5, 0.5);
      return check_gradient(obj, p);
    }
    default: throw std::invalid_argument("gradient_check: " + std::string(kind_name(spec.kind)) + " is not gradient-trained");
  }
}

}  // namespace triclass
