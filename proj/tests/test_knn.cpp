#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "oracles.hpp"
#include "triclass/knn.hpp"

using namespace triclass;

namespace {

std::vector<std::string> feature_names(const FeatureSet& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs.features()) out.push_back(f.feature);
  return out;
}

std::vector<std::vector<std::string>> words_of(const Corpus& c) {
  std::vector<std::vector<std::string>> out;
  for (const auto& inst : c.instances) out.push_back(oracle::split_spaces(inst.text));
  return out;
}

// Count vector over `fs` reduced by its gcd, so proportional vectors compare equal.
std::vector<std::uint32_t> direction(const CountVector& v, std::size_t width) {
  std::vector<std::uint32_t> dense(width, 0);
  std::uint32_t g = 0;
  for (std::size_t j = 0; j < v.indices.size(); ++j) {
    dense[v.indices[j]] = v.counts[j];
    g = std::gcd(g, v.counts[j]);
  }
  if (g > 1) {
    for (auto& x : dense) x /= g;
  }
  return dense;
}

}  // namespace

TEST(Knn, MatchesExhaustiveOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Corpus train = oracle::random_corpus(rng, 1 + rng.below(50), 1 + rng.below(12), 6);
    const Corpus queries = oracle::random_corpus(rng, 10, 14, 6, "q");
    const Task task = kAllTasks[rng.below(3)];
    const auto fs = select_features(train, task, 1 + rng.below(12));
    const auto names = feature_names(fs);
    const auto train_words = words_of(train);
    const auto labels = train.labels_for(task);
    for (std::size_t k : default_k_values()) {
      if (k > train.size()) continue;
      const auto model = knn_fit(train, task, fs, k);
      for (const auto& q : queries.instances) {
        ASSERT_EQ(model.predict_text(q.text),
                  oracle::knn(names, train_words, labels, oracle::split_spaces(q.text), k, task))
            << "trial " << trial << " k " << k;
      }
    }
  }
}

TEST(Knn, MajorityOfNearest) {
  Corpus train;
  train.labeled = true;
  train.instances = {{"0", "x y", LabelTriple::of(0, 0, 0)},
                     {"1", "x y y", LabelTriple::of(0, 0, 0)},
                     {"2", "x", LabelTriple::of(0, 1, 0)},
                     {"3", "z", LabelTriple::of(0, 1, 0)},
                     {"4", "z z", LabelTriple::of(0, 1, 0)}};
  const FeatureSet fs(Task::gender, FeatureUnit::token, {{"x", 1, 3}, {"y", 1, 3}, {"z", 1, 3}});
  // Nearest three to "x y" are docs 0, 1 (GEN) and 2 (NGEN).
  EXPECT_EQ(knn_fit(train, Task::gender, fs, 3).predict_text("x y"), 0);
  EXPECT_EQ(knn_fit(train, Task::gender, fs, 1).predict_text("z"), 1);
  // Whole training set: NGEN holds the majority.
  EXPECT_EQ(knn_fit(train, Task::gender, fs, 5).predict_text("x y"), 1);
}

TEST(Knn, ZeroQueryFallsBackToPriorThenName) {
  Corpus train;
  train.labeled = true;
  train.instances = {{"0", "a", LabelTriple::of(0, 1, 0)},
                     {"1", "b", LabelTriple::of(0, 0, 0)},
                     {"2", "c", LabelTriple::of(0, 0, 0)}};
  const FeatureSet fs(Task::gender, FeatureUnit::token, {{"a", 1, 1}, {"b", 1, 1}, {"c", 1, 1}});
  // All similarities are 0, so rank order is index order: K=1 picks doc 0.
  EXPECT_EQ(knn_fit(train, Task::gender, fs, 1).predict_text("nothing here"), 1);
  // K=2 ties one vote each at mass 0; GEN has the larger prior.
  EXPECT_EQ(knn_fit(train, Task::gender, fs, 2).predict_text("nothing here"), 0);
}

TEST(Knn, KBounds) {
  Corpus train;
  train.labeled = true;
  train.instances = {{"0", "a", LabelTriple::of(0, 0, 0)}, {"1", "b", LabelTriple::of(0, 1, 0)}};
  const FeatureSet fs(Task::gender, FeatureUnit::token, {{"a", 1, 1}});
  EXPECT_THROW(knn_fit(train, Task::gender, fs, 0), std::invalid_argument);
  EXPECT_THROW(knn_fit(train, Task::gender, fs, 3), std::invalid_argument);
  EXPECT_NO_THROW(knn_fit(train, Task::gender, fs, 2));
  EXPECT_THROW(knn_fit(train, Task::communal, fs, 1), std::invalid_argument);
  EXPECT_THROW(knn_fit(Corpus{}, Task::gender, fs, 1), std::invalid_argument);
}

TEST(Knn, FullKIsMajorityPredictor) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const Corpus train = oracle::random_corpus(rng, 1 + rng.below(30), 8);
    const Task task = kAllTasks[rng.below(3)];
    std::vector<std::size_t> prior(class_count(task), 0);
    for (int y : train.labels_for(task)) ++prior[static_cast<std::size_t>(y)];
    const std::size_t top = *std::max_element(prior.begin(), prior.end());
    if (std::count(prior.begin(), prior.end(), top) != 1) continue;
    const auto majority = static_cast<int>(std::max_element(prior.begin(), prior.end()) - prior.begin());
    const auto model = knn_fit(train, task, select_features(train, task, 8), train.size());
    for (int q = 0; q < 5; ++q) {
      ASSERT_EQ(model.predict_text("f" + std::to_string(rng.below(10)) + " f" + std::to_string(rng.below(10))),
                majority);
    }
  }
}

TEST(Knn, QueryScaleInvariance) {
  Rng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const Corpus train = oracle::random_corpus(rng, 2 + rng.below(30), 8);
    const Task task = kAllTasks[rng.below(3)];
    const auto model = knn_fit(train, task, select_features(train, task, 8), 1 + rng.below(train.size()));
    const std::string q = oracle::random_corpus(rng, 1, 8).instances[0].text;
    ASSERT_EQ(model.predict_text(q), model.predict_text(q + " " + q + " " + q));
  }
}

TEST(Knn, MemorizesDistinctTrainingVectors) {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const Corpus raw = oracle::random_corpus(rng, 5 + rng.below(40), 6, 6);
    const Task task = kAllTasks[rng.below(3)];
    const auto fs = select_features(raw, task, 100);
    Corpus train;
    train.labeled = true;
    std::set<std::vector<std::uint32_t>> seen;
    for (const auto& inst : raw.instances) {
      const auto v = count_features(tokenize(inst.text), fs);
      if (v.empty()) continue;
      if (seen.insert(direction(v, fs.size())).second) train.instances.push_back(inst);
    }
    const auto model = knn_fit(train, task, fs, 1);
    for (const auto& inst : train.instances) ASSERT_EQ(model.predict_text(inst.text), inst.labels->get(task));
  }
}

TEST(Knn, JsonRoundTrip) {
  Rng rng(35);
  const Corpus train = oracle::random_corpus(rng, 20, 9);
  const auto model = knn_fit(train, Task::aggression, select_features(train, Task::aggression, 5), 3);
  const auto back = KnnModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  EXPECT_EQ(back.to_json(), model.to_json());
  const Corpus queries = oracle::random_corpus(rng, 30, 9);
  for (const auto& q : queries.instances) EXPECT_EQ(back.predict_text(q.text), model.predict_text(q.text));
  auto bad = model.to_json();
  bad["format_version"] = 99;
  EXPECT_THROW(KnnModel::from_json(bad), std::runtime_error);
}

TEST(Sweep, BestCellTieRule) {
  const SweepCell a{1000, 1, 9, 10};
  const SweepCell b{500, 2, 9, 10};
  const SweepCell c{500, 1, 9, 10};
  const SweepCell d{30000, 50, 10, 10};
  EXPECT_TRUE(better_cell(a, b));
  EXPECT_TRUE(better_cell(c, a));
  EXPECT_TRUE(better_cell(d, c));
  EXPECT_FALSE(better_cell(c, c));
}

TEST(Sweep, CellsAgreeWithDirectFits) {
  Rng rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const Corpus train = oracle::random_corpus(rng, 10 + rng.below(30), 12);
    const Corpus dev = oracle::random_corpus(rng, 15, 12, 8, "v");
    const Task task = kAllTasks[rng.below(3)];
    SweepOptions o;
    o.feature_counts = {2, 5, 9};
    o.threads = 1;
    const auto grid = knn_sweep(train, dev, task, o);
    for (const auto& cell : grid.cells) {
      ASSERT_LE(cell.k, train.size());
      const auto model = knn_fit(train, task, select_features(train, task, cell.features), cell.k);
      std::size_t correct = 0;
      for (const auto& inst : dev.instances) correct += model.predict_text(inst.text) == inst.labels->get(task);
      ASSERT_EQ(cell.correct, correct);
    }
    for (const auto& cell : grid.cells) ASSERT_FALSE(better_cell(cell, grid.best));
  }
}

TEST(Sweep, SingleClassTrainingSet) {
  Rng rng(37);
  Corpus train = oracle::random_corpus(rng, 12, 6);
  for (auto& inst : train.instances) inst.labels->set(Task::gender, 1);
  const Corpus dev = oracle::random_corpus(rng, 40, 6, 8, "v");
  std::size_t ngen = 0;
  for (const auto& inst : dev.instances) ngen += inst.labels->get(Task::gender) == 1;
  SweepOptions o;
  o.feature_counts = {1, 3, 6};
  const auto grid = knn_sweep(train, dev, Task::gender, o);
  for (const auto& cell : grid.cells) EXPECT_EQ(cell.correct, ngen);
  // K values above 12 are skipped: 1,2,3,4,5,10 remain.
  EXPECT_EQ(grid.cells.size(), 3u * 6u);
  EXPECT_EQ(grid.best.k, 1u);
  EXPECT_EQ(grid.best.features, 1u);
}

TEST(Sweep, Errors) {
  Rng rng(38);
  const Corpus train = oracle::random_corpus(rng, 3, 4);
  SweepOptions o;
  o.feature_counts = {1};
  o.k_values = {5, 10};
  EXPECT_THROW(knn_sweep(train, train, Task::gender, o), std::invalid_argument);
  o.k_values = {0};
  EXPECT_THROW(knn_sweep(train, train, Task::gender, o), std::invalid_argument);
  o.k_values = {};
  EXPECT_THROW(knn_sweep(train, train, Task::gender, o), std::invalid_argument);
}
