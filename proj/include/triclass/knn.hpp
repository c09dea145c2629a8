#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/labels.hpp"
#include "triclass/parallel.hpp"
#include "triclass/vsm.hpp"

namespace triclass {

inline constexpr std::size_t kKnnFormatVersion = 1;

struct Neighbor {
  std::uint32_t index = 0;
  std::uint64_t dot = 0;  // integer dot product of raw term counts
};

/// Cosine K-nearest-neighbor classifier for one task.
///
/// Training documents are kept as raw count vectors so that neighbor
/// ranking can compare cosines exactly: for a fixed query q,
/// cos(q,a) > cos(q,b)  <=>  dot(q,a)^2 * |b|^2 > dot(q,b)^2 * |a|^2.
/// Ties in similarity go to the lower training index. The vote picks the
/// most frequent label, then the larger summed similarity, then the larger
/// training prior, then the lexicographically smaller label name.
class KnnModel {
 public:
  KnnModel() = default;

  KnnModel(Task task, FeatureSet features, std::vector<CountVector> vectors, std::vector<int> labels,
           std::size_t k)
      : task_(task), features_(std::move(features)), vectors_(std::move(vectors)), labels_(std::move(labels)),
        k_(k) {
    if (vectors_.empty()) throw std::invalid_argument("knn: empty training set");
    if (vectors_.size() != labels_.size()) throw std::invalid_argument("knn: vectors/labels size mismatch");
    if (k_ == 0 || k_ > vectors_.size()) {
      throw std::invalid_argument("knn: k=" + std::to_string(k_) + " outside [1, " +
                                  std::to_string(vectors_.size()) + "]");
    }
    prior_.assign(class_count(task_), 0);
    for (int y : labels_) {
      if (y < 0 || static_cast<std::size_t>(y) >= prior_.size()) throw std::invalid_argument("knn: bad label");
      ++prior_[static_cast<std::size_t>(y)];
    }
    norms_.reserve(vectors_.size());
    postings_.assign(features_.size(), {});
    for (std::uint32_t d = 0; d < vectors_.size(); ++d) {
      const auto& v = vectors_[d];
      norms_.push_back(v.squared_norm());
      for (std::size_t j = 0; j < v.indices.size(); ++j) {
        if (v.indices[j] >= features_.size()) throw std::invalid_argument("knn: feature index out of range");
        postings_[v.indices[j]].push_back({d, v.counts[j]});
      }
    }
  }

  Task task() const { return task_; }
  std::size_t k() const { return k_; }
  std::size_t size() const { return vectors_.size(); }
  const FeatureSet& features() const { return features_; }
  const std::vector<CountVector>& vectors() const { return vectors_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::size_t>& prior() const { return prior_; }

  /// The `limit` nearest training documents, best first.
  std::vector<Neighbor> rank(const CountVector& query, std::size_t limit) const {
    limit = std::min(limit, vectors_.size());
    std::vector<std::uint64_t> dots(vectors_.size(), 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t j = 0; j < query.indices.size(); ++j) {
      const auto q = static_cast<std::uint64_t>(query.counts[j]);
      for (const auto& p : postings_[query.indices[j]]) {
        if (dots[p.doc] == 0) touched.push_back(p.doc);
        dots[p.doc] += q * p.count;
      }
    }
    std::vector<Neighbor> positive;
    positive.reserve(touched.size());
    for (auto d : touched) positive.push_back({d, dots[d]});
    auto closer = [this](const Neighbor& a, const Neighbor& b) {
      const auto lhs = static_cast<unsigned __int128>(a.dot) * a.dot * norms_[b.index];
      const auto rhs = static_cast<unsigned __int128>(b.dot) * b.dot * norms_[a.index];
      if (lhs != rhs) return lhs > rhs;
      return a.index < b.index;
    };
    std::vector<Neighbor> out;
    out.reserve(limit);
    if (positive.size() > limit) {
      std::partial_sort(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(limit), positive.end(),
                        closer);
      positive.resize(limit);
    } else {
      std::sort(positive.begin(), positive.end(), closer);
    }
    out = std::move(positive);
    for (std::uint32_t d = 0; out.size() < limit && d < vectors_.size(); ++d) {
      if (dots[d] == 0) out.push_back({d, 0});
    }
    return out;
  }

  double similarity(const CountVector& query, const Neighbor& n) const {
    if (n.dot == 0) return 0.0;
    return static_cast<double>(n.dot) /
           std::sqrt(static_cast<double>(query.squared_norm()) * static_cast<double>(norms_[n.index]));
  }

  /// Label vote over the first k entries of a ranking.
  int vote(const CountVector& query, std::span<const Neighbor> ranked, std::size_t k) const {
    k = std::min(k, ranked.size());
    const std::size_t classes = prior_.size();
    std::vector<std::size_t> votes(classes, 0);
    std::vector<double> mass(classes, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const auto y = static_cast<std::size_t>(labels_[ranked[i].index]);
      ++votes[y];
      mass[y] += similarity(query, ranked[i]);
    }
    const auto names = class_names(task_);
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (votes[c] != votes[best]) {
        if (votes[c] > votes[best]) best = c;
        continue;
      }
      if (mass[c] != mass[best]) {
        if (mass[c] > mass[best]) best = c;
        continue;
      }
      if (prior_[c] != prior_[best]) {
        if (prior_[c] > prior_[best]) best = c;
        continue;
      }
      if (names[c] < names[best]) best = c;
    }
    return static_cast<int>(best);
  }

  int predict_counts(const CountVector& query) const { return vote(query, rank(query, k_), k_); }

  int predict_units(std::span<const std::string> units) const {
    return predict_counts(count_features(units, features_));
  }

  int predict_text(std::string_view text) const { return predict_units(extract_units(text, features_.unit())); }

  nlohmann::json to_json() const {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : features_.features()) features.push_back({f.feature, f.chi2, f.frequency});
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& v : vectors_) vectors.push_back({v.indices, v.counts});
    return {{"format", "knn"},
            {"format_version", kKnnFormatVersion},
            {"task", task_name(task_)},
            {"k", k_},
            {"unit", unit_name(features_.unit())},
            {"features", std::move(features)},
            {"labels", labels_},
            {"vectors", std::move(vectors)}};
  }

  static KnnModel from_json(const nlohmann::json& j) {
    if (j.at("format") != "knn") throw std::runtime_error("not a knn model");
    if (j.at("format_version").get<std::size_t>() != kKnnFormatVersion) {
      throw std::runtime_error("knn model format version mismatch");
    }
    const Task task = task_from_name(j.at("task").get<std::string>());
    std::vector<SelectedFeature> features;
    for (const auto& f : j.at("features")) {
      features.push_back({f.at(0).get<std::string>(), f.at(1).get<double>(), f.at(2).get<std::size_t>()});
    }
    std::vector<CountVector> vectors;
    for (const auto& v : j.at("vectors")) {
      vectors.push_back({v.at(0).get<std::vector<std::uint32_t>>(), v.at(1).get<std::vector<std::uint32_t>>()});
    }
    return KnnModel(task, FeatureSet(task, parse_unit(j.at("unit").get<std::string>()), std::move(features)),
                    std::move(vectors), j.at("labels").get<std::vector<int>>(), j.at("k").get<std::size_t>());
  }

 private:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t count;
  };

  Task task_ = Task::aggression;
  FeatureSet features_;
  std::vector<CountVector> vectors_;
  std::vector<int> labels_;
  std::size_t k_ = 1;
  std::vector<std::size_t> prior_;
  std::vector<std::uint64_t> norms_;
  std::vector<std::vector<Posting>> postings_;
};

inline std::vector<CountVector> count_corpus(const Corpus& corpus, const FeatureSet& fs) {
  std::vector<CountVector> out;
  out.reserve(corpus.size());
  for (const auto& inst : corpus.instances) out.push_back(count_features(extract_units(inst.text, fs.unit()), fs));
  return out;
}

inline KnnModel knn_fit(const Corpus& train, Task task, const FeatureSet& fs, std::size_t k) {
  if (train.empty()) throw std::invalid_argument("knn_fit: empty training corpus");
  if (fs.task() != task) throw std::invalid_argument("knn_fit: feature set was selected for another task");
  return KnnModel(task, fs, count_corpus(train, fs), train.labels_for(task), k);
}

inline int knn_predict(const KnnModel& model, const TokenizedDoc& doc) {
  if (model.features().unit() != FeatureUnit::token) {
    throw std::invalid_argument("knn_predict: token document against a char_ngram model");
  }
  return model.predict_units(doc.tokens);
}

// --------------------------------------------------------------------------
// Sweep

inline const std::vector<std::size_t>& default_k_values() {
  static const std::vector<std::size_t> ks{1, 2, 3, 4, 5, 10, 15, 20, 25, 50};
  return ks;
}

inline std::vector<std::size_t> feature_count_range(std::size_t first, std::size_t last, std::size_t step) {
  if (first == 0 || step == 0 || last < first) throw std::invalid_argument("bad feature-count range");
  std::vector<std::size_t> out;
  for (std::size_t n = first; n <= last; n += step) out.push_back(n);
  return out;
}

inline const std::vector<std::size_t>& default_feature_counts() {
  static const std::vector<std::size_t> ns = feature_count_range(500, 30000, 500);
  return ns;
}

struct SweepCell {
  std::size_t features = 0;
  std::size_t k = 0;
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepGrid {
  Task task = Task::aggression;
  std::vector<std::size_t> k_values;
  std::vector<std::size_t> feature_counts;
  /// Row-major by feature count, then k. Cells with k > |train| are absent.
  std::vector<SweepCell> cells;
  SweepCell best;

  friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

/// Accuracy desc, then smaller k, then smaller feature count.
inline bool better_cell(const SweepCell& a, const SweepCell& b) {
  // Same denominator across cells, so correct counts compare exactly.
  if (a.correct * b.total != b.correct * a.total) return a.correct * b.total > b.correct * a.total;
  if (a.k != b.k) return a.k < b.k;
  return a.features < b.features;
}

struct SweepOptions {
  std::vector<std::size_t> k_values = default_k_values();
  std::vector<std::size_t> feature_counts = default_feature_counts();
  std::size_t threads = 0;
};

inline SweepGrid knn_sweep(const Corpus& train, const Corpus& dev, Task task, const FeatureStatistics& stats,
                           const SweepOptions& options = {}) {
  if (!train.labeled || !dev.labeled) throw std::invalid_argument("knn_sweep: both corpora must be labeled");
  if (train.empty() || dev.empty()) throw std::invalid_argument("knn_sweep: empty corpus");
  if (options.k_values.empty() || options.feature_counts.empty()) {
    throw std::invalid_argument("knn_sweep: empty grid");
  }
  SweepGrid grid;
  grid.task = task;
  grid.k_values = options.k_values;
  grid.feature_counts = options.feature_counts;

  const std::size_t max_n = *std::max_element(options.feature_counts.begin(), options.feature_counts.end());
  const FeatureSet full = select_features(stats, task, max_n);
  const auto train_counts = count_corpus(train, full);
  const auto dev_counts = count_corpus(dev, full);
  const auto train_y = train.labels_for(task);
  const auto dev_y = dev.labels_for(task);

  auto truncate = [](const CountVector& v, std::size_t n) {
    CountVector out;
    for (std::size_t j = 0; j < v.indices.size() && v.indices[j] < n; ++j) {
      out.indices.push_back(v.indices[j]);
      out.counts.push_back(v.counts[j]);
    }
    return out;
  };

  std::size_t max_k = 0;
  for (auto k : options.k_values) {
    if (k == 0) throw std::invalid_argument("knn_sweep: k must be at least 1");
    if (k <= train.size()) max_k = std::max(max_k, k);
  }
  if (max_k == 0) throw std::invalid_argument("knn_sweep: every k exceeds the training size");

  bool have_best = false;
  for (std::size_t n : options.feature_counts) {
    std::vector<CountVector> vectors;
    vectors.reserve(train_counts.size());
    for (const auto& v : train_counts) vectors.push_back(truncate(v, n));
    const KnnModel model(task, full.prefix(n), std::move(vectors), train_y, max_k);

    std::vector<std::vector<int>> predictions(dev.size());
    parallel_for(dev.size(), options.threads, [&](std::size_t i) {
      const CountVector q = truncate(dev_counts[i], n);
      const auto ranked = model.rank(q, max_k);
      auto& row = predictions[i];
      row.reserve(options.k_values.size());
      for (auto k : options.k_values) row.push_back(k <= train.size() ? model.vote(q, ranked, k) : -1);
    });

    for (std::size_t ki = 0; ki < options.k_values.size(); ++ki) {
      const std::size_t k = options.k_values[ki];
      if (k > train.size()) continue;
      SweepCell cell{n, k, 0, dev.size()};
      for (std::size_t i = 0; i < dev.size(); ++i) cell.correct += predictions[i][ki] == dev_y[i] ? 1 : 0;
      grid.cells.push_back(cell);
      if (!have_best || better_cell(cell, grid.best)) {
        grid.best = cell;
        have_best = true;
      }
    }
  }
  return grid;
}

inline SweepGrid knn_sweep(const Corpus& train, const Corpus& dev, Task task, const SweepOptions& options = {},
                           FeatureUnit unit = FeatureUnit::token) {
  return knn_sweep(train, dev, task, FeatureStatistics(train, FeatureStatistics::kDefaultPool, unit), options);
}

inline void write_sweep_tsv(const SweepGrid& grid, std::ostream& out) {
  out << "features\tk\taccuracy\n";
  for (const auto& c : grid.cells) out << c.features << '\t' << c.k << '\t' << format_double(c.accuracy()) << '\n';
}

inline nlohmann::json sweep_summary(const SweepGrid& grid) {
  return {{"task", task_name(grid.task)},
          {"k_values", grid.k_values},
          {"feature_counts", grid.feature_counts},
          {"cells", grid.cells.size()},
          {"best", {{"features", grid.best.features},
                    {"k", grid.best.k},
                    {"accuracy", grid.best.accuracy()},
                    {"correct", grid.best.correct},
                    {"total", grid.best.total}}}};
}

}  // namespace triclass
