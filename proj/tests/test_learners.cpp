#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "triclass/learners/learner.hpp"

using namespace triclass;

namespace {

struct Dataset {
  FeatureMatrix x;
  std::vector<int> y;
};

// Labels follow a noisy linear rule over dense features with some zeros, so
// every learner has something to fit and sparse paths are exercised.
Dataset make_data(Rng& rng, std::size_t n, std::size_t d, std::size_t classes, double zero_rate = 0.3) {
  Dataset out{FeatureMatrix(d), {}};
  std::vector<double> w(d * classes);
  for (double& v : w) v = rng.uniform(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (double& v : row) v = rng.uniform() < zero_rate ? 0.0 : rng.uniform(-2, 2);
    std::vector<double> s(classes, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < classes; ++k) s[k] += row[j] * w[j * classes + k];
    }
    int label = static_cast<int>(argmax(s));
    if (rng.uniform() < 0.1) label = static_cast<int>(rng.below(classes));
    out.x.add_dense_row(row);
    out.y.push_back(label);
  }
  // Every class present.
  for (std::size_t k = 0; k < classes; ++k) out.y[k] = static_cast<int>(k);
  return out;
}

// Small but non-trivial settings so the full matrix of kinds runs quickly.
LearnerSpec quick_spec(LearnerKind kind, std::uint64_t seed = 7) {
  LearnerSpec s{kind, {}, seed};
  s.params.random_forest.trees = 15;
  s.params.gbm.rounds = 15;
  s.params.adaboost.rounds = 15;
  s.params.mlp.hidden = 8;
  s.params.mlp.epochs = 10;
  s.params.linear_svm.epochs = 5;
  s.params.logistic_regression.max_iterations = 100;
  return s;
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

FeatureMatrix permuted(const FeatureMatrix& x, const std::vector<std::size_t>& order) { return x.select_rows(order); }

}  // namespace

TEST(NaiveBayes, HandComputedEstimates) {
  FeatureMatrix x(2);
  x.add_dense_row(std::vector<double>{2, 0});
  x.add_dense_row(std::vector<double>{0, 3});
  const std::vector<int> y{0, 1};
  const auto model = train_learner({LearnerKind::naive_bayes, {}, 0}, x, y);
  const auto& nb = std::get<NaiveBayesModel>(model.parameters());
  EXPECT_NEAR(std::exp(nb.log_prob(0, 0)), 3.0 / 4.0, 1e-15);
  EXPECT_NEAR(std::exp(nb.log_prob(0, 1)), 1.0 / 4.0, 1e-15);
  EXPECT_NEAR(std::exp(nb.log_prob(1, 0)), 1.0 / 5.0, 1e-15);
  EXPECT_NEAR(std::exp(nb.log_prob(1, 1)), 4.0 / 5.0, 1e-15);
  // Query [1,0] with equal priors: (3/4) / (3/4 + 1/5) = 15/19.
  FeatureMatrix q(2);
  q.add_dense_row(std::vector<double>{1, 0});
  const auto p = model.predict_proba(q);
  EXPECT_NEAR(p(0, 0), 15.0 / 19.0, 1e-12);
  EXPECT_NEAR(p(0, 1), 4.0 / 19.0, 1e-12);
}

TEST(NaiveBayes, NegativeValuesCountAsZero) {
  FeatureMatrix a(2), b(2);
  a.add_dense_row(std::vector<double>{2, -1});
  a.add_dense_row(std::vector<double>{-4, 3});
  b.add_dense_row(std::vector<double>{2, 0});
  b.add_dense_row(std::vector<double>{0, 3});
  const std::vector<int> y{0, 1};
  EXPECT_EQ(train_learner({LearnerKind::naive_bayes, {}, 0}, a, y).parameters(),
            train_learner({LearnerKind::naive_bayes, {}, 0}, b, y).parameters());
}

TEST(Logistic, ZeroWeightsGiveUniform) {
  const LinearModel m{3, 2, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0)};
  FeatureMatrix x(2);
  x.add_dense_row(std::vector<double>{5, -1});
  const auto p = predict_linear(m, x);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(p(0, k), 1.0 / 3.0, 1e-15);
}

TEST(Logistic, BiasGradientVanishesAtZeroOnBalancedData) {
  FeatureMatrix x(2);
  std::vector<int> y;
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    x.add_dense_row(std::vector<double>{rng.uniform(-1, 1), rng.uniform(-1, 1)});
    y.push_back(i % 3);
  }
  const LogisticObjective obj(x, y, 3, 1e-4);
  const std::vector<double> zero(obj.dimension(), 0.0);
  std::vector<double> g(obj.dimension());
  obj.gradient(zero, g);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(g[2 * 3 + k], 0.0, 1e-15);
}

TEST(GradientCheck, AgreesWithFiniteDifferences) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t classes = 2 + rng.below(3);
    const auto data = make_data(rng, 8 + rng.below(20), 2 + rng.below(5), classes);
    for (auto kind : {LearnerKind::logistic_regression, LearnerKind::linear_svm, LearnerKind::mlp}) {
      LearnerSpec spec = quick_spec(kind, 100 + trial);
      spec.params.logistic_regression.lambda = 0.01;
      spec.params.linear_svm.lambda = 0.01;
      const auto r = gradient_check(spec, data.x, data.y, classes);
      EXPECT_LE(r.max_relative_deviation, 1e-4) << kind_name(kind) << " trial " << trial;
      EXPECT_GT(r.checked, 0u);
    }
  }
  const auto data = make_data(rng, 10, 3, 2);
  EXPECT_THROW(gradient_check(quick_spec(LearnerKind::gbm), data.x, data.y, 2), std::invalid_argument);
}

TEST(ProbabilityContract, EveryKind) {
  Rng rng(43);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t classes = 2 + rng.below(2);
    const auto data = make_data(rng, 30 + rng.below(40), 2 + rng.below(6), classes);
    // Arbitrary label values, re-indexed internally.
    std::vector<int> y = data.y;
    for (int& v : y) v = v * 7 - 5;
    const auto test = make_data(rng, 25, data.x.cols(), classes);
    for (auto kind : kAllLearnerKinds) {
      const auto model = train_learner(quick_spec(kind, trial), data.x, y);
      ASSERT_EQ(model.classes().size(), classes);
      const auto p = model.predict_proba(test.x);
      ASSERT_EQ(p.rows, test.x.rows());
      ASSERT_EQ(p.cols, classes);
      for (std::size_t i = 0; i < p.rows; ++i) {
        double s = 0.0;
        for (double v : p.row(i)) {
          ASSERT_GE(v, 0.0) << kind_name(kind);
          s += v;
        }
        ASSERT_NEAR(s, 1.0, 1e-9) << kind_name(kind);
      }
      for (int label : model.predict(test.x)) {
        ASSERT_NE(std::find(y.begin(), y.end(), label), y.end());
      }
    }
  }
}

TEST(ConstantModel, SingleClassTraining) {
  FeatureMatrix x(3);
  x.add_dense_row(std::vector<double>{1, 2, 3});
  x.add_dense_row(std::vector<double>{0, 0, 1});
  const std::vector<int> y{4, 4};
  for (auto kind : kAllLearnerKinds) {
    const auto model = train_learner(quick_spec(kind), x, y);
    EXPECT_TRUE(model.is_constant());
    const auto p = model.predict_proba(x);
    EXPECT_EQ(p.cols, 1u);
    EXPECT_EQ(p(0, 0), 1.0);
    EXPECT_EQ(model.predict(x), (std::vector<int>{4, 4}));
    EXPECT_EQ(LearnerModel::from_json(model.to_json()), model);
  }
}

TEST(Determinism, SameSpecAndSeedIsBitIdentical) {
  Rng rng(44);
  const auto data = make_data(rng, 60, 5, 3);
  for (auto kind : kAllLearnerKinds) {
    const auto a = train_learner(quick_spec(kind, 9), data.x, data.y);
    const auto b = train_learner(quick_spec(kind, 9), data.x, data.y);
    EXPECT_EQ(a, b) << kind_name(kind);
    EXPECT_EQ(a.predict_proba(data.x), b.predict_proba(data.x)) << kind_name(kind);
  }
}

TEST(Permutation, NaiveBayesAndLogisticUnchanged) {
  Rng rng(45);
  for (int trial = 0; trial < 5; ++trial) {
    const auto data = make_data(rng, 40, 4, 3);
    std::vector<std::size_t> order(data.y.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    std::vector<int> y2;
    for (auto i : order) y2.push_back(data.y[i]);
    const FeatureMatrix x2 = permuted(data.x, order);
    for (auto kind : {LearnerKind::naive_bayes, LearnerKind::logistic_regression}) {
      EXPECT_EQ(train_learner(quick_spec(kind), data.x, data.y), train_learner(quick_spec(kind), x2, y2))
          << kind_name(kind);
    }
  }
}

TEST(Permutation, TreeEnsemblesWithinTolerance) {
  Rng rng(46);
  const auto data = make_data(rng, 200, 5, 3);
  std::vector<std::size_t> order(data.y.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span(order));
  std::vector<int> y2;
  for (auto i : order) y2.push_back(data.y[i]);
  const FeatureMatrix x2 = permuted(data.x, order);
  for (auto kind : {LearnerKind::random_forest, LearnerKind::gbm, LearnerKind::adaboost}) {
    auto spec = quick_spec(kind);
    spec.params.random_forest.trees = 50;
    const double a = accuracy(train_learner(spec, data.x, data.y).predict(data.x), data.y);
    const double b = accuracy(train_learner(spec, x2, y2).predict(x2), y2);
    EXPECT_NEAR(a, b, 0.02) << kind_name(kind);
  }
}

TEST(AdaBoost, SingleRoundEqualsStump) {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t classes = 2 + rng.below(2);
    const auto data = make_data(rng, 50, 4, classes);
    auto spec = quick_spec(LearnerKind::adaboost);
    spec.params.adaboost.rounds = 1;
    const auto model = train_learner(spec, data.x, data.y);
    const auto& ada = std::get<AdaBoostModel>(model.parameters());
    ASSERT_EQ(ada.stumps.size(), 1u);
    ASSERT_LE(ada.stumps[0].depth(), 1u);
    const auto pred = model.predict(data.x);
    for (std::size_t i = 0; i < data.y.size(); ++i) {
      ASSERT_EQ(pred[i], model.classes()[argmax(ada.stumps[0].leaf(data.x.row(i)))]);
    }
  }
}

TEST(RandomForest, OneFullTreeWithoutBootstrapIsCart) {
  Rng rng(48);
  const auto data = make_data(rng, 80, 6, 3);
  auto spec = quick_spec(LearnerKind::random_forest);
  spec.params.random_forest.trees = 1;
  spec.params.random_forest.bootstrap = false;
  spec.params.random_forest.max_features = 6;
  const auto model = train_learner(spec, data.x, data.y);
  const auto& forest = std::get<ForestModel>(model.parameters());

  const BinnedMatrix binned(data.x);
  const std::vector<double> weights(data.y.size(), 1.0);
  TreeTargets t;
  t.classes = 3;
  t.labels = data.y;
  t.weights = weights;
  TreeBuilder builder(binned, t);
  TreeParams tp;
  tp.max_depth = spec.params.random_forest.max_depth;
  const Tree cart = builder.build(all_rows(data.y.size()), tp, nullptr);
  ASSERT_EQ(forest.trees.size(), 1u);
  EXPECT_EQ(forest.trees[0], cart);
}

TEST(Gbm, StagedTrainingLossNonIncreasing) {
  Rng rng(49);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t classes = 2 + rng.below(2);
    const auto data = make_data(rng, 100, 4, classes);
    auto spec = quick_spec(LearnerKind::gbm);
    spec.params.gbm.rounds = 30;
    const auto model = train_learner(spec, data.x, data.y);
    const auto& gbm = std::get<GbmModel>(model.parameters());
    double previous = INFINITY;
    for (std::size_t r = 0; r <= gbm.rounds.size(); ++r) {
      const auto p = predict_gbm(gbm, data.x, r);
      double loss = 0.0;
      for (std::size_t i = 0; i < data.y.size(); ++i) loss -= std::log(p(i, static_cast<std::size_t>(data.y[i])));
      loss /= static_cast<double>(data.y.size());
      ASSERT_LE(loss, previous + 1e-12) << "round " << r;
      previous = loss;
    }
  }
}

TEST(Learners, FitSeparableData) {
  // Two well-separated clusters: every kind should get the training set right.
  FeatureMatrix x(2);
  std::vector<int> y;
  Rng rng(50);
  for (int i = 0; i < 60; ++i) {
    const int c = i % 2;
    x.add_dense_row(std::vector<double>{c ? 3 + rng.uniform() : rng.uniform(), c ? rng.uniform() : 3 + rng.uniform()});
    y.push_back(c);
  }
  for (auto kind : kAllLearnerKinds) {
    auto spec = quick_spec(kind);
    spec.params.mlp.epochs = 50;
    EXPECT_GE(accuracy(train_learner(spec, x, y).predict(x), y), 0.95) << kind_name(kind);
  }
}

TEST(Serialization, JsonRoundTripEveryKind) {
  Rng rng(51);
  const auto data = make_data(rng, 40, 4, 3);
  for (auto kind : kAllLearnerKinds) {
    const auto model = train_learner(quick_spec(kind), data.x, data.y);
    const auto back = LearnerModel::from_json(nlohmann::json::parse(model.to_json().dump()));
    EXPECT_EQ(back, model) << kind_name(kind);
    EXPECT_EQ(back.predict_proba(data.x), model.predict_proba(data.x)) << kind_name(kind);
  }
  auto j = train_learner(quick_spec(LearnerKind::naive_bayes), data.x, data.y).to_json();
  j["format_version"] = 2;
  EXPECT_THROW(LearnerModel::from_json(j), std::runtime_error);
  j["format_version"] = 1;
  j["format"] = "knn";
  EXPECT_THROW(LearnerModel::from_json(j), std::runtime_error);
}

TEST(Learners, InputErrors) {
  Rng rng(52);
  const auto data = make_data(rng, 20, 3, 2);
  const auto model = train_learner(quick_spec(LearnerKind::logistic_regression), data.x, data.y);
  FeatureMatrix wide(4);
  wide.add_dense_row(std::vector<double>{1, 2, 3, 4});
  EXPECT_THROW(model.predict_proba(wide), std::invalid_argument);

  FeatureMatrix bad(2);
  bad.add_dense_row(std::vector<double>{1, NAN});
  bad.add_dense_row(std::vector<double>{1, 2});
  EXPECT_THROW(train_learner(quick_spec(LearnerKind::naive_bayes), bad, std::vector<int>{0, 1}), std::invalid_argument);
  EXPECT_THROW(train_learner(quick_spec(LearnerKind::naive_bayes), data.x, std::vector<int>{0}), std::invalid_argument);
  EXPECT_THROW(train_learner(quick_spec(LearnerKind::naive_bayes), FeatureMatrix(3), std::vector<int>{}),
               std::invalid_argument);
  EXPECT_THROW(parse_kind("perceptron"), std::invalid_argument);
}

TEST(Learners, SeedDerivation) {
  EXPECT_EQ(learner_seed(3, 0), 3000u);
  const auto specs = default_base_specs(2);
  ASSERT_EQ(specs.size(), 6u);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    EXPECT_EQ(specs[i].kind, kBaseLearnerKinds[i]);
    EXPECT_EQ(specs[i].seed, 2000u + i);
  }
}
