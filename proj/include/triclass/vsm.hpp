#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/delimited.hpp"
#include "triclass/labels.hpp"
#include "triclass/text.hpp"

namespace triclass {

/// What a "string feature" is: a tokenizer token, or a character n-gram
/// (n = 2..5) taken inside space-padded whitespace-delimited chunks.
enum class FeatureUnit : std::uint8_t { token, char_ngram };

inline std::string_view unit_name(FeatureUnit unit) {
  return unit == FeatureUnit::token ? "token" : "char_ngram";
}

inline FeatureUnit parse_unit(std::string_view name) {
  if (name == "token") return FeatureUnit::token;
  if (name == "char_ngram" || name == "char-ngram") return FeatureUnit::char_ngram;
  throw std::invalid_argument("unknown feature unit: " + std::string(name));
}

inline constexpr std::size_t kMinCharGram = 2;
inline constexpr std::size_t kMaxCharGram = 5;

inline std::vector<std::string> char_ngrams(std::string_view text) {
  std::vector<std::string> grams;
  std::vector<std::string> chunk{" "};
  auto flush = [&] {
    if (chunk.size() == 1) return;
    chunk.emplace_back(" ");
    for (std::size_t n = kMinCharGram; n <= kMaxCharGram; ++n) {
      for (std::size_t i = 0; i + n <= chunk.size(); ++i) {
        std::string g;
        for (std::size_t j = i; j < i + n; ++j) g += chunk[j];
        grams.push_back(std::move(g));
      }
    }
    chunk.assign(1, " ");
  };
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t start = pos;
    const char32_t c = unicode::next_scalar(text, pos);
    if (unicode::is_space(c)) {
      flush();
      continue;
    }
    std::string s;
    if (c == unicode::kReplacement) {
      unicode::append_utf8(s, c);
    } else {
      s.assign(text.substr(start, pos - start));
    }
    chunk.push_back(std::move(s));
  }
  flush();
  return grams;
}

inline std::vector<std::string> extract_units(std::string_view text, FeatureUnit unit) {
  return unit == FeatureUnit::token ? tokenize(text) : char_ngrams(text);
}

// --------------------------------------------------------------------------
// Vocabulary

struct VocabularyEntry {
  std::string feature;
  std::size_t frequency = 0;

  friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// Features ordered by corpus frequency (descending), ties lexicographic.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<VocabularyEntry> entries) : entries_(std::move(entries)) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].feature, i);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  const VocabularyEntry& operator[](std::size_t i) const { return entries_[i]; }

  std::optional<std::size_t> find(std::string_view feature) const {
    auto it = index_.find(std::string(feature));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<VocabularyEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline bool frequency_order(const VocabularyEntry& a, const VocabularyEntry& b) {
  if (a.frequency != b.frequency) return a.frequency > b.frequency;
  return a.feature < b.feature;
}

inline Vocabulary build_vocabulary(const Corpus& corpus, std::size_t cap,
                                   FeatureUnit unit = FeatureUnit::token) {
  if (cap == 0) throw std::invalid_argument("vocabulary cap must be positive");
  if (corpus.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& inst : corpus.instances) {
    for (auto& f : extract_units(inst.text, unit)) ++counts[std::move(f)];
  }
  std::vector<VocabularyEntry> entries;
  entries.reserve(counts.size());
  for (auto& [feature, n] : counts) entries.push_back({feature, n});
  const std::size_t keep = std::min(cap, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), frequency_order);
  entries.resize(keep);
  return Vocabulary(std::move(entries));
}

// --------------------------------------------------------------------------
// Chi-square

/// Closed-form statistic of a 2x2 table; zero when any marginal is zero.
inline double chi2_statistic(double a, double b, double c, double d) {
  const double n = a + b + c + d;
  const double denom = (a + b) * (c + d) * (a + c) * (b + d);
  if (denom == 0.0) return 0.0;
  const double diff = a * d - b * c;
  return n * diff * diff / denom;
}

/// Max over one-vs-rest classes of the presence/class chi-square.
/// `with_feature[c]` counts documents of class c containing the feature.
inline double chi2_from_counts(std::span<const std::size_t> with_feature,
                               std::span<const std::size_t> class_sizes) {
  std::size_t docs = 0;
  std::size_t df = 0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    docs += class_sizes[c];
    df += with_feature[c];
  }
  double best = 0.0;
  for (std::size_t c = 0; c < class_sizes.size(); ++c) {
    const auto a = static_cast<double>(with_feature[c]);
    const auto b = static_cast<double>(df - with_feature[c]);
    const auto cc = static_cast<double>(class_sizes[c] - with_feature[c]);
    const auto d = static_cast<double>(docs - df) - cc;
    best = std::max(best, chi2_statistic(a, b, cc, d));
  }
  return best;
}

inline double chi2_score(std::string_view feature, const Corpus& corpus, Task task,
                         FeatureUnit unit = FeatureUnit::token) {
  const auto y = corpus.labels_for(task);
  std::vector<std::size_t> with(class_count(task), 0);
  std::vector<std::size_t> sizes(class_count(task), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto units = extract_units(corpus.instances[i].text, unit);
    const bool present = std::find(units.begin(), units.end(), feature) != units.end();
    ++sizes[static_cast<std::size_t>(y[i])];
    if (present) ++with[static_cast<std::size_t>(y[i])];
  }
  return chi2_from_counts(with, sizes);
}

/// Per-class document counts for every feature in a candidate pool, for all
/// three tasks at once. Built in one pass; immutable afterwards.
class FeatureStatistics {
 public:
  static constexpr std::size_t kDefaultPool = 60000;

  FeatureStatistics(const Corpus& corpus, std::size_t pool = kDefaultPool,
                    FeatureUnit unit = FeatureUnit::token)
      : unit_(unit), vocabulary_(build_vocabulary(corpus, pool, unit)) {
    if (!corpus.labeled) throw std::invalid_argument("feature statistics need a labeled corpus");
    for (Task t : kAllTasks) {
      const auto k = class_count(t);
      const auto ti = static_cast<std::size_t>(t);
      class_sizes_[ti].assign(k, 0);
      presence_[ti].assign(vocabulary_.size() * k, 0);
    }
    std::vector<std::size_t> doc_features;
    for (const auto& inst : corpus.instances) {
      doc_features.clear();
      for (const auto& f : extract_units(inst.text, unit)) {
        if (auto idx = vocabulary_.find(f)) doc_features.push_back(*idx);
      }
      std::sort(doc_features.begin(), doc_features.end());
      doc_features.erase(std::unique(doc_features.begin(), doc_features.end()), doc_features.end());
      for (Task t : kAllTasks) {
        const auto ti = static_cast<std::size_t>(t);
        const auto k = class_count(t);
        const auto label = static_cast<std::size_t>(inst.labels->get(t));
        ++class_sizes_[ti][label];
        for (std::size_t f : doc_features) ++presence_[ti][f * k + label];
      }
    }
  }

  FeatureUnit unit() const { return unit_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }

  double chi2(std::size_t feature, Task task) const {
    const auto ti = static_cast<std::size_t>(task);
    const auto k = class_count(task);
    return chi2_from_counts(std::span(presence_[ti]).subspan(feature * k, k), class_sizes_[ti]);
  }

 private:
  FeatureUnit unit_;
  Vocabulary vocabulary_;
  std::array<std::vector<std::size_t>, 3> class_sizes_;
  std::array<std::vector<std::size_t>, 3> presence_;
};

// --------------------------------------------------------------------------
// Feature sets

struct SelectedFeature {
  std::string feature;
  double chi2 = 0.0;
  std::size_t frequency = 0;

  friend bool operator==(const SelectedFeature&, const SelectedFeature&) = default;
};

/// Chi2-ranked features for one task. Index i is the feature's column.
class FeatureSet {
 public:
  FeatureSet() = default;
  FeatureSet(Task task, FeatureUnit unit, std::vector<SelectedFeature> features)
      : task_(task), unit_(unit), features_(std::move(features)) {
    index_.reserve(features_.size());
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (!index_.emplace(features_[i].feature, static_cast<std::uint32_t>(i)).second) {
        throw std::invalid_argument("duplicate feature in feature set: " + features_[i].feature);
      }
    }
  }

  Task task() const { return task_; }
  FeatureUnit unit() const { return unit_; }
  std::size_t size() const { return features_.size(); }
  const std::vector<SelectedFeature>& features() const { return features_; }

  std::optional<std::uint32_t> find(const std::string& feature) const {
    auto it = index_.find(feature);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// The first n features, which is what selecting n would have produced.
  FeatureSet prefix(std::size_t n) const {
    n = std::min(n, features_.size());
    return FeatureSet(task_, unit_, {features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(n)});
  }

  friend bool operator==(const FeatureSet& a, const FeatureSet& b) {
    return a.task_ == b.task_ && a.unit_ == b.unit_ && a.features_ == b.features_;
  }

 private:
  Task task_ = Task::aggression;
  FeatureUnit unit_ = FeatureUnit::token;
  std::vector<SelectedFeature> features_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline FeatureSet select_features(const FeatureStatistics& stats, Task task, std::size_t n) {
  if (n == 0) throw std::invalid_argument("feature count must be at least 1");
  const Vocabulary& vocab = stats.vocabulary();
  std::vector<SelectedFeature> ranked;
  ranked.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    ranked.push_back({vocab[i].feature, stats.chi2(i, task), vocab[i].frequency});
  }
  auto order = [](const SelectedFeature& a, const SelectedFeature& b) {
    if (a.chi2 != b.chi2) return a.chi2 > b.chi2;
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.feature < b.feature;
  };
  const std::size_t keep = std::min(n, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    order);
  ranked.resize(keep);
  return FeatureSet(task, stats.unit(), std::move(ranked));
}

inline FeatureSet select_features(const Corpus& corpus, Task task, std::size_t n,
                                  FeatureUnit unit = FeatureUnit::token,
                                  std::size_t pool = FeatureStatistics::kDefaultPool) {
  if (!corpus.labeled) throw std::invalid_argument("feature selection needs a labeled corpus");
  if (n == 0) throw std::invalid_argument("feature count must be at least 1");
  return select_features(FeatureStatistics(corpus, pool, unit), task, n);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// TSV with a `# task=... unit=...` line, a header, then
/// (rank, feature, chi2, frequency) rows.
inline void write_feature_set(const FeatureSet& fs, std::ostream& out) {
  out << "# task=" << task_name(fs.task()) << " unit=" << unit_name(fs.unit()) << '\n';
  write_record(out, {"rank", "feature", "chi2", "frequency"}, '\t');
  std::size_t rank = 1;
  for (const auto& f : fs.features()) {
    write_record(out, {std::to_string(rank++), f.feature, format_double(f.chi2), std::to_string(f.frequency)},
                 '\t');
  }
}

inline FeatureSet read_feature_set(std::string_view data) {
  const auto newline = data.find('\n');
  if (!data.starts_with("# ") || newline == std::string_view::npos) {
    throw DataError("feature set: missing '# task=... unit=...' line");
  }
  std::istringstream meta(std::string(data.substr(2, newline - 2)));
  std::optional<Task> task;
  std::optional<FeatureUnit> unit;
  std::string kv;
  while (meta >> kv) {
    if (kv.starts_with("task=")) task = task_from_name(kv.substr(5));
    if (kv.starts_with("unit=")) unit = parse_unit(kv.substr(5));
  }
  if (!task || !unit) throw DataError("feature set: incomplete metadata line");
  const auto records = parse_delimited(data.substr(newline + 1), '\t');
  std::vector<SelectedFeature> features;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 4) throw DataError("feature set: row " + std::to_string(r) + " is malformed");
    if (std::stoul(rec[0]) != features.size() + 1) throw DataError("feature set: ranks out of order");
    features.push_back({rec[1], std::strtod(rec[2].c_str(), nullptr), std::stoul(rec[3])});
  }
  return FeatureSet(*task, *unit, std::move(features));
}

inline nlohmann::json feature_set_to_json(const FeatureSet& fs) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : fs.features()) features.push_back({f.feature, f.chi2, f.frequency});
  return {{"task", task_name(fs.task())}, {"unit", unit_name(fs.unit())}, {"features", std::move(features)}};
}

inline FeatureSet feature_set_from_json(const nlohmann::json& j) {
  std::vector<SelectedFeature> features;
  for (const auto& f : j.at("features")) {
    features.push_back({f.at(0).get<std::string>(), f.at(1).get<double>(), f.at(2).get<std::size_t>()});
  }
  return FeatureSet(task_from_name(j.at("task").get<std::string>()), parse_unit(j.at("unit").get<std::string>()),
                    std::move(features));
}

// --------------------------------------------------------------------------
// Vectors

/// Raw term counts over a feature set, indices strictly increasing.
struct CountVector {
  std::vector<std::uint32_t> indices;
  std::vector<std::uint32_t> counts;

  std::uint64_t squared_norm() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += static_cast<std::uint64_t>(c) * c;
    return s;
  }
  bool empty() const { return indices.empty(); }

  friend bool operator==(const CountVector&, const CountVector&) = default;
};

struct SparseVector {
  std::size_t dimension = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  bool is_zero() const { return indices.empty(); }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

inline CountVector count_features(std::span<const std::string> units, const FeatureSet& fs) {
  std::vector<std::uint32_t> hits;
  for (const auto& u : units) {
    if (auto idx = fs.find(u)) hits.push_back(*idx);
  }
  std::sort(hits.begin(), hits.end());
  CountVector v;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    v.indices.push_back(hits[i]);
    v.counts.push_back(static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return v;
}

inline SparseVector normalize(const CountVector& counts, std::size_t dimension) {
  SparseVector v;
  v.dimension = dimension;
  v.indices = counts.indices;
  const double norm = std::sqrt(static_cast<double>(counts.squared_norm()));
  v.values.reserve(counts.counts.size());
  for (auto c : counts.counts) v.values.push_back(static_cast<double>(c) / norm);
  return v;
}

/// L2-normalized term-frequency vector; the zero vector when nothing fires.
inline SparseVector vectorize(std::span<const std::string> units, const FeatureSet& fs) {
  return normalize(count_features(units, fs), fs.size());
}

inline SparseVector vectorize(const TokenizedDoc& doc, const FeatureSet& fs) {
  if (fs.unit() != FeatureUnit::token) {
    throw std::invalid_argument("vectorize: token document against a " +
                                std::string(unit_name(fs.unit())) + " feature set");
  }
  return vectorize(doc.tokens, fs);
}

inline SparseVector vectorize_text(std::string_view text, const FeatureSet& fs) {
  return vectorize(extract_units(text, fs.unit()), fs);
}

inline double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.indices.size() && j < b.indices.size()) {
    if (a.indices[i] < b.indices[j]) {
      ++i;
    } else if (a.indices[i] > b.indices[j]) {
      ++j;
    } else {
      s += a.values[i++] * b.values[j++];
    }
  }
  return s;
}

inline double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.dimension != b.dimension) {
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(a.dimension) + " vs " +
                                std::to_string(b.dimension) + ")");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

}  // namespace triclass
