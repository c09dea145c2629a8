#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "triclass/learners/tree.hpp"
#include "triclass/matrix.hpp"
#include "triclass/random.hpp"

namespace triclass {

namespace detail {

inline nlohmann::json trees_to_json(const std::vector<Tree>& trees) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : trees) out.push_back(t.to_json());
  return out;
}

inline std::vector<Tree> trees_from_json(const nlohmann::json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(Tree::from_json(t));
  return out;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Random forest

struct RandomForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 16;
  /// Features per split; 0 means floor(sqrt(d)).
  std::size_t max_features = 0;
  bool bootstrap = true;
  std::size_t max_bins = BinnedMatrix::kDefaultMaxBins;
};

struct ForestModel {
  std::size_t classes = 0;
  std::vector<Tree> trees;

  nlohmann::json to_json() const { return {{"classes", classes}, {"trees", detail::trees_to_json(trees)}}; }
  static ForestModel from_json(const nlohmann::json& j) {
    return {j.at("classes").get<std::size_t>(), detail::trees_from_json(j.at("trees"))};
  }
  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

inline std::size_t resolve_max_features(std::size_t requested, std::size_t d) {
  if (requested != 0) return std::min(requested, d);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
}

/// Each tree draws from its own stream derived from (seed, tree index).
inline ForestModel train_random_forest(const RandomForestParams& params, const FeatureMatrix& x,
                                       std::span<const int> y, std::size_t classes, std::uint64_t seed) {
  const BinnedMatrix binned(x, params.max_bins);
  std::vector<double> weights(x.rows(), 1.0);
  TreeTargets targets;
  targets.criterion = SplitCriterion::gini;
  targets.classes = classes;
  targets.labels = y;
  targets.weights = weights;
  TreeBuilder builder(binned, targets);
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.max_features = resolve_max_features(params.max_features, x.cols());
  ForestModel m;
  m.classes = classes;
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, t));
    if (params.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < x.rows(); ++i) weights[rng.below(x.rows())] += 1.0;
    }
    m.trees.push_back(builder.build(all_rows(x.rows()), tp, &rng));
  }
  return m;
}

inline DenseMatrix predict_forest(const ForestModel& m, const FeatureMatrix& x) {
  DenseMatrix out(x.rows(), m.classes);
  const double inv = 1.0 / static_cast<double>(m.trees.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.row(i);
    const auto r = x.row(i);
    for (const auto& t : m.trees) {
      const auto& leaf = t.leaf(r);
      for (std::size_t k = 0; k < m.classes; ++k) row[k] += leaf[k];
    }
    for (double& v : row) v *= inv;
  }
  return out;
}

// --------------------------------------------------------------------------
// Gradient boosting on multiclass log-loss

struct GbmParams {
  std::size_t rounds = 100;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  std::size_t max_bins = BinnedMatrix::kDefaultMaxBins;
};

/// One regression tree per class per round, fit to y_k - p_k, with the
/// one-step Newton leaf value (K-1)/K * sum(r) / sum(|r|(1-|r|)).
/// Leaf values already include the learning rate.
struct GbmModel {
  std::size_t classes = 0;
  std::vector<double> initial;           // log class priors
  std::vector<std::vector<Tree>> rounds;  // rounds x classes

  /// Raw scores after the first `use_rounds` rounds.
  DenseMatrix raw_scores(const FeatureMatrix& x, std::size_t use_rounds) const {
    use_rounds = std::min(use_rounds, rounds.size());
    DenseMatrix out(x.rows(), classes);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto row = out.row(i);
      std::copy(initial.begin(), initial.end(), row.begin());
      const auto r = x.row(i);
      for (std::size_t m = 0; m < use_rounds; ++m) {
        for (std::size_t k = 0; k < classes; ++k) row[k] += rounds[m][k].leaf(r)[0];
      }
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rounds) rs.push_back(detail::trees_to_json(r));
    return {{"classes", classes}, {"initial", initial}, {"rounds", std::move(rs)}};
  }
  static GbmModel from_json(const nlohmann::json& j) {
    GbmModel m;
    m.classes = j.at("classes").get<std::size_t>();
    m.initial = j.at("initial").get<std::vector<double>>();
    for (const auto& r : j.at("rounds")) m.rounds.push_back(detail::trees_from_json(r));
    return m;
  }
  friend bool operator==(const GbmModel&, const GbmModel&) = default;
};

inline GbmModel train_gbm(const GbmParams& params, const FeatureMatrix& x, std::span<const int> y,
                          std::size_t classes) {
  const std::size_t n = x.rows();
  const BinnedMatrix binned(x, params.max_bins);
  GbmModel m;
  m.classes = classes;
  m.initial.assign(classes, 0.0);
  {
    std::vector<double> counts(classes, 0.0);
    for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
    for (std::size_t k = 0; k < classes; ++k) m.initial[k] = std::log(counts[k] / static_cast<double>(n));
  }
  DenseMatrix scores(n, classes);
  for (std::size_t i = 0; i < n; ++i) std::copy(m.initial.begin(), m.initial.end(), scores.row(i).begin());

  std::vector<double> residual(n);
  const std::vector<double> weights(n, 1.0);
  TreeTargets targets;
  targets.criterion = SplitCriterion::squared_error;
  targets.values = residual;
  targets.weights = weights;
  TreeBuilder builder(binned, targets);
  TreeParams tp;
  tp.max_depth = params.max_depth;
  std::vector<std::int32_t> leaf_of(n, -1);
  DenseMatrix prob(n, classes);
  const double factor = static_cast<double>(classes - 1) / static_cast<double>(classes);
  auto leaf_value = [&](std::span<const std::uint32_t> rows) {
    double num = 0.0;
    double den = 0.0;
    for (auto r : rows) {
      num += residual[r];
      den += std::abs(residual[r]) * (1.0 - std::abs(residual[r]));
    }
    if (den < 1e-150) return 0.0;
    return params.learning_rate * factor * num / den;
  };

  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      auto p = prob.row(i);
      std::copy(scores.row(i).begin(), scores.row(i).end(), p.begin());
      softmax(p);
    }
    std::vector<Tree> trees;
    trees.reserve(classes);
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        residual[i] = (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0) - prob(i, k);
      }
      Tree tree = builder.build(all_rows(n), tp, nullptr, leaf_value, leaf_of);
      for (std::size_t i = 0; i < n; ++i) scores(i, k) += tree.nodes[static_cast<std::size_t>(leaf_of[i])].value[0];
      trees.push_back(std::move(tree));
    }
    m.rounds.push_back(std::move(trees));
  }
  return m;
}

inline DenseMatrix predict_gbm(const GbmModel& m, const FeatureMatrix& x, std::size_t use_rounds = SIZE_MAX) {
  DenseMatrix out = m.raw_scores(x, use_rounds);
  for (std::size_t i = 0; i < out.rows; ++i) softmax(out.row(i));
  return out;
}

// --------------------------------------------------------------------------
// AdaBoost (SAMME) over depth-1 Gini stumps

struct AdaBoostParams {
  std::size_t rounds = 50;
  std::size_t max_bins = BinnedMatrix::kDefaultMaxBins;
};

struct AdaBoostModel {
  std::size_t classes = 0;
  std::vector<Tree> stumps;
  std::vector<double> alphas;

  nlohmann::json to_json() const {
    return {{"classes", classes}, {"stumps", detail::trees_to_json(stumps)}, {"alphas", alphas}};
  }
  static AdaBoostModel from_json(const nlohmann::json& j) {
    return {j.at("classes").get<std::size_t>(), detail::trees_from_json(j.at("stumps")),
            j.at("alphas").get<std::vector<double>>()};
  }
  friend bool operator==(const AdaBoostModel&, const AdaBoostModel&) = default;
};

inline AdaBoostModel train_adaboost(const AdaBoostParams& params, const FeatureMatrix& x, std::span<const int> y,
                                    std::size_t classes) {
  const std::size_t n = x.rows();
  const BinnedMatrix binned(x, params.max_bins);
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  TreeTargets targets;
  targets.criterion = SplitCriterion::gini;
  targets.classes = classes;
  targets.labels = y;
  targets.weights = weights;
  TreeBuilder builder(binned, targets);
  TreeParams tp;
  tp.max_depth = 1;
  std::vector<std::int32_t> leaf_of(n, -1);
  AdaBoostModel m;
  m.classes = classes;
  const double chance_error = 1.0 - 1.0 / static_cast<double>(classes);
  for (std::size_t round = 0; round < params.rounds; ++round) {
    Tree stump = builder.build(all_rows(n), tp, nullptr, {}, leaf_of);
    double wrong = 0.0;
    double total = 0.0;
    std::vector<bool> miss(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& dist = stump.nodes[static_cast<std::size_t>(leaf_of[i])].value;
      miss[i] = argmax(dist) != static_cast<std::size_t>(y[i]);
      total += weights[i];
      if (miss[i]) wrong += weights[i];
    }
    const double error = wrong / total;
    if (error <= 0.0) {
      m.stumps.push_back(std::move(stump));
      m.alphas.push_back(1.0);
      break;
    }
    if (error >= chance_error) {
      // No better than chance: keep it only if nothing else exists.
      if (m.stumps.empty()) {
        m.stumps.push_back(std::move(stump));
        m.alphas.push_back(1.0);
      }
      break;
    }
    const double alpha = std::log((1.0 - error) / error) + std::log(static_cast<double>(classes) - 1.0);
    m.stumps.push_back(std::move(stump));
    m.alphas.push_back(alpha);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) weights[i] *= std::exp(alpha);
      norm += weights[i];
    }
    for (double& w : weights) w /= norm;
  }
  return m;
}

/// Softmax of the normalized SAMME vote divided by (K - 1).
inline DenseMatrix predict_adaboost(const AdaBoostModel& m, const FeatureMatrix& x) {
  DenseMatrix out(x.rows(), m.classes);
  double alpha_sum = 0.0;
  for (double a : m.alphas) alpha_sum += a;
  const double divisor = static_cast<double>(std::max<std::size_t>(1, m.classes - 1));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.row(i);
    const auto r = x.row(i);
    for (std::size_t s = 0; s < m.stumps.size(); ++s) row[argmax(m.stumps[s].leaf(r))] += m.alphas[s];
    for (double& v : row) v /= alpha_sum * divisor;
    softmax(row);
  }
  return out;
}

}  // namespace triclass
