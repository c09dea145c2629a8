#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/labels.hpp"
#include "triclass/random.hpp"

namespace triclass {

/// Token-level generator. Every (task, class) pair owns a block of
/// `class_words` words; the rest of the vocabulary is shared background.
/// A document draws its true triple uniformly, then each token comes from
/// one of its three class blocks with probability `signal` (task chosen
/// uniformly) and from the background otherwise. Each observed label is
/// replaced by a uniform draw over the task's classes with probability
/// `noise`. Noise comes from its own stream, so texts and true labels do not
/// depend on the noise rate.
struct SyntheticSpec {
  std::size_t instances = 1000;
  std::size_t class_words = 10;
  std::size_t background_words = 500;
  std::size_t min_tokens = 15;
  std::size_t max_tokens = 30;
  double signal = 0.9;
  double noise = 0.0;
  std::uint64_t seed = 1;
  std::string id_prefix = "syn";
  std::string split = "synthetic";

  void validate() const {
    if (instances == 0) throw std::invalid_argument("synthetic: instances must be positive");
    if (class_words == 0) throw std::invalid_argument("synthetic: class_words must be positive");
    if (min_tokens == 0 || min_tokens > max_tokens) throw std::invalid_argument("synthetic: bad token range");
    if (!(signal >= 0.0 && signal <= 1.0)) throw std::invalid_argument("synthetic: signal must be in [0,1]");
    if (signal < 1.0 && background_words == 0) throw std::invalid_argument("synthetic: background vocabulary empty");
    if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("synthetic: noise must be in [0,1)");
  }

  std::size_t vocabulary_size() const { return 7 * class_words + background_words; }

  nlohmann::json to_json() const {
    return {{"instances", instances}, {"class_words", class_words}, {"background_words", background_words},
            {"min_tokens", min_tokens}, {"max_tokens", max_tokens}, {"signal", signal},
            {"noise", noise},         {"seed", seed},               {"id_prefix", id_prefix},
            {"split", split}};
  }
};

/// Lowercase letters only, so every word is one token: "w" + base-26 index.
inline std::string synthetic_word(std::size_t index) {
  std::string s;
  do {
    s.insert(s.begin(), static_cast<char>('a' + index % 26));
    index /= 26;
  } while (index != 0);
  return "w" + s;
}

/// Vocabulary index of word j in the block of (task, class).
inline std::size_t class_word_index(const SyntheticSpec& spec, Task task, int label, std::size_t j) {
  std::size_t block = static_cast<std::size_t>(label);
  for (Task t : kAllTasks) {
    if (t == task) break;
    block += class_count(t);
  }
  return block * spec.class_words + j;
}

inline Corpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Rng noise_rng(derive_seed(spec.seed, 1));
  Corpus corpus;
  corpus.split = spec.split;
  corpus.labeled = true;
  corpus.instances.reserve(spec.instances);
  const std::size_t background_start = 7 * spec.class_words;
  const std::size_t width = std::to_string(spec.instances).size();
  for (std::size_t i = 0; i < spec.instances; ++i) {
    LabelTriple truth;
    for (Task t : kAllTasks) truth.set(t, static_cast<int>(rng.below(class_count(t))));
    const std::size_t length = spec.min_tokens + rng.below(spec.max_tokens - spec.min_tokens + 1);
    std::string text;
    for (std::size_t p = 0; p < length; ++p) {
      std::size_t word = 0;
      if (rng.uniform() < spec.signal) {
        const Task t = kAllTasks[rng.below(kAllTasks.size())];
        word = class_word_index(spec, t, truth.get(t), rng.below(spec.class_words));
      } else {
        word = background_start + rng.below(spec.background_words);
      }
      if (p > 0) text += (p % 8 == 0) ? ". " : " ";
      text += synthetic_word(word);
    }
    text += '.';
    LabelTriple observed = truth;
    for (Task t : kAllTasks) {
      if (noise_rng.uniform() < spec.noise) observed.set(t, static_cast<int>(noise_rng.below(class_count(t))));
    }
    std::string id = std::to_string(i);
    id.insert(0, width - id.size(), '0');
    corpus.instances.push_back({spec.id_prefix + "_" + id, std::move(text), observed});
  }
  return corpus;
}

}  // namespace triclass
