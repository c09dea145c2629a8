#include <gtest/gtest.h>

#include <set>

#include "triclass/knn.hpp"
#include "triclass/synthetic.hpp"
#include "triclass/text.hpp"

using namespace triclass;

TEST(Synthetic, SameSeedSameCorpus) {
  SyntheticSpec s;
  s.instances = 200;
  s.seed = 9;
  EXPECT_EQ(generate_synthetic(s), generate_synthetic(s));
  SyntheticSpec other = s;
  other.seed = 10;
  EXPECT_NE(generate_synthetic(s), generate_synthetic(other));
}

TEST(Synthetic, ShapeOfDocuments) {
  SyntheticSpec s;
  s.instances = 150;
  const auto c = generate_synthetic(s);
  ASSERT_EQ(c.size(), 150u);
  EXPECT_TRUE(c.labeled);
  std::set<std::string> ids;
  for (const auto& inst : c.instances) {
    ids.insert(inst.id);
    std::size_t words = 0;
    for (const auto& tok : tokenize(inst.text)) {
      if (tok != ".") {
        ++words;
        EXPECT_EQ(tok[0], 'w');
      }
    }
    EXPECT_GE(words, s.min_tokens);
    EXPECT_LE(words, s.max_tokens);
    EXPECT_EQ(inst.text.back(), '.');
  }
  EXPECT_EQ(ids.size(), 150u);
  EXPECT_EQ(c.instances[7].id, "syn_007");
}

TEST(Synthetic, WordsAndBlocks) {
  EXPECT_EQ(synthetic_word(0), "wa");
  EXPECT_EQ(synthetic_word(25), "wz");
  EXPECT_EQ(synthetic_word(26), "wba");
  SyntheticSpec s;
  s.class_words = 10;
  EXPECT_EQ(class_word_index(s, Task::aggression, 0, 0), 0u);
  EXPECT_EQ(class_word_index(s, Task::gender, 1, 2), 42u);
  EXPECT_EQ(class_word_index(s, Task::communal, 1, 9), 69u);
  EXPECT_EQ(s.vocabulary_size(), 570u);
}

TEST(Synthetic, HalfNoiseCapsBinaryAccuracy) {
  // With noise 0.5 a binary label matches the true one with probability
  // 1/2 + 1/2 * 1/2 = 3/4, which bounds any classifier's expected accuracy.
  SyntheticSpec clean;
  clean.instances = 4000;
  clean.seed = 77;
  SyntheticSpec noisy = clean;
  noisy.noise = 0.5;
  const auto truth = generate_synthetic(clean);
  const auto observed = generate_synthetic(noisy);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ASSERT_EQ(truth.instances[i].text, observed.instances[i].text);
    agree += truth.instances[i].labels->get(Task::gender) == observed.instances[i].labels->get(Task::gender);
  }
  EXPECT_NEAR(static_cast<double>(agree) / static_cast<double>(truth.size()), 0.75, 0.03);

  SyntheticSpec train_spec = noisy;
  train_spec.instances = 2000;
  train_spec.seed = 78;
  SyntheticSpec dev_spec = noisy;
  dev_spec.instances = 1000;
  dev_spec.seed = 79;
  dev_spec.id_prefix = "dev";
  const auto train = generate_synthetic(train_spec);
  const auto dev = generate_synthetic(dev_spec);
  for (std::size_t k : {1u, 25u}) {
    const auto model = knn_fit(train, Task::gender, select_features(train, Task::gender, 30000), k);
    std::size_t correct = 0;
    for (const auto& inst : dev.instances) correct += model.predict_text(inst.text) == inst.labels->get(Task::gender);
    EXPECT_LE(static_cast<double>(correct) / static_cast<double>(dev.size()), 0.85) << "k " << k;
  }
}

TEST(Synthetic, ValidateRejectsBadSpecs) {
  SyntheticSpec s;
  s.noise = 1.0;
  EXPECT_THROW(generate_synthetic(s), std::invalid_argument);
  s = {};
  s.instances = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.min_tokens = 10;
  s.max_tokens = 5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.signal = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.background_words = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.signal = 1.0;
  EXPECT_NO_THROW(s.validate());
}
