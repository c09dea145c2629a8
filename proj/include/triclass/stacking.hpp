#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "triclass/learners/learner.hpp"
#include "triclass/matrix.hpp"
#include "triclass/parallel.hpp"
#include "triclass/random.hpp"

namespace triclass {

inline constexpr int kStackFormatVersion = 1;

struct StackOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::ostream* warnings = nullptr;
};

/// Sorted distinct labels.
inline std::vector<int> distinct_labels(std::span<const int> y) {
  std::vector<int> c(y.begin(), y.end());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

/// The fold count actually used: the requested count, lowered to the size
/// of the smallest class (but never below 2).
inline std::size_t effective_folds(std::span<const int> y, std::size_t requested, std::ostream* warnings = nullptr) {
  if (requested < 2) throw std::invalid_argument("stacking needs at least 2 folds");
  if (y.size() < requested) {
    throw std::invalid_argument("stacking: " + std::to_string(y.size()) + " rows for " + std::to_string(requested) +
                                " folds");
  }
  std::map<int, std::size_t> sizes;
  for (int v : y) ++sizes[v];
  std::size_t smallest = y.size();
  for (const auto& [label, n] : sizes) smallest = std::min(smallest, n);
  const std::size_t folds = std::max<std::size_t>(2, std::min(requested, smallest));
  if (folds < requested && warnings) {
    *warnings << "warning: smallest class has " << smallest << " members; using " << folds << " folds instead of "
              << requested << '\n';
  }
  return folds;
}

/// Stratified fold id per row. Each class's members are shuffled and then
/// dealt round-robin, continuing the deal across classes.
inline std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> fold(y.size());
  std::size_t position = 0;
  for (int c : distinct_labels(y)) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) members.push_back(i);
    }
    rng.shuffle(std::span(members));
    for (auto i : members) fold[i] = position++ % folds;
  }
  return fold;
}

inline std::size_t meta_width(std::size_t bases, std::size_t classes) { return bases * (classes + 1); }

namespace detail {

/// Writes one base model's block of meta columns for every row of `x`:
/// probabilities over `classes` (zero for classes the model never saw),
/// then the argmax class index.
inline void write_meta_block(const LearnerModel& model, const FeatureMatrix& x, std::span<const int> classes,
                             std::span<const std::size_t> rows, std::size_t block, DenseMatrix& meta) {
  const DenseMatrix p = model.predict_proba(x);
  const std::size_t k = classes.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = p.row(r);
    double* out = &meta(rows[r], block * (k + 1));
    std::fill(out, out + k + 1, 0.0);
    for (std::size_t m = 0; m < model.classes().size(); ++m) {
      const auto pos = std::lower_bound(classes.begin(), classes.end(), model.classes()[m]) - classes.begin();
      out[pos] = row[m];
    }
    out[k] = static_cast<double>(std::max_element(out, out + k) - out);
  }
}

}  // namespace detail

/// Out-of-fold meta-features: row i's block for each base learner comes from
/// a model trained without i's fold.
inline DenseMatrix make_oof_meta_features(std::span<const LearnerSpec> bases, const FeatureMatrix& x,
                                          std::span<const int> y, const StackOptions& options) {
  if (bases.empty()) throw std::invalid_argument("stacking needs at least one base learner");
  if (x.rows() != y.size()) throw std::invalid_argument("stacking: rows and labels differ in length");
  const std::size_t folds = effective_folds(y, options.folds, options.warnings);
  const auto fold = stratified_folds(y, folds, options.seed);
  const auto classes = distinct_labels(y);
  DenseMatrix meta(x.rows(), meta_width(bases.size(), classes.size()));

  std::vector<std::vector<std::size_t>> train_rows(folds);
  std::vector<std::vector<std::size_t>> held_rows(folds);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t f = 0; f < folds; ++f) (fold[i] == f ? held_rows : train_rows)[f].push_back(i);
  }
  // Each (fold, learner) cell writes a disjoint block of `meta`.
  parallel_for(folds * bases.size(), options.threads, [&](std::size_t cell) {
    const std::size_t f = cell / bases.size();
    const std::size_t b = cell % bases.size();
    std::vector<int> fy;
    fy.reserve(train_rows[f].size());
    for (auto i : train_rows[f]) fy.push_back(y[i]);
    const LearnerModel model = train_learner(bases[b], x.select_rows(train_rows[f]), fy);
    detail::write_meta_block(model, x.select_rows(held_rows[f]), classes, held_rows[f], b, meta);
  });
  return meta;
}

/// The leaky construction: meta-features from base models trained on all
/// rows, evaluated on those same rows. Only for probing the OOF path.
inline DenseMatrix make_in_fold_meta_features(std::span<const LearnerSpec> bases, const FeatureMatrix& x,
                                              std::span<const int> y, std::size_t threads = 1) {
  const auto classes = distinct_labels(y);
  DenseMatrix meta(x.rows(), meta_width(bases.size(), classes.size()));
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  parallel_for(bases.size(), threads, [&](std::size_t b) {
    detail::write_meta_block(train_learner(bases[b], x, y), x, classes, rows, b, meta);
  });
  return meta;
}

struct StackModel {
  std::vector<int> classes;
  std::vector<LearnerModel> bases;
  LearnerModel final_estimator;
  std::size_t folds = 0;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return bases.empty() ? 0 : bases.front().input_dim(); }

  nlohmann::json to_json() const {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& m : bases) b.push_back(m.to_json());
    return {{"format", "stack"},
            {"format_version", kStackFormatVersion},
            {"classes", classes},
            {"folds", folds},
            {"seed", seed},
            {"bases", std::move(b)},
            {"final", final_estimator.to_json()}};
  }
  static StackModel from_json(const nlohmann::json& j) {
    if (j.at("format") != "stack") throw std::runtime_error("not a stack model");
    if (j.at("format_version").get<int>() != kStackFormatVersion) {
      throw std::runtime_error("stack model format version mismatch");
    }
    StackModel m;
    m.classes = j.at("classes").get<std::vector<int>>();
    m.folds = j.at("folds").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& b : j.at("bases")) m.bases.push_back(LearnerModel::from_json(b));
    m.final_estimator = LearnerModel::from_json(j.at("final"));
    return m;
  }
  friend bool operator==(const StackModel&, const StackModel&) = default;
};

/// Spec of the final estimator: default logistic regression.
inline LearnerSpec final_estimator_spec(std::uint64_t seed) {
  return {LearnerKind::logistic_regression, {}, seed};
}

inline StackModel fit_stacked(std::span<const LearnerSpec> bases, const FeatureMatrix& x, std::span<const int> y,
                              const StackOptions& options) {
  StackModel m;
  m.classes = distinct_labels(y);
  m.folds = effective_folds(y, options.folds, options.warnings);
  m.seed = options.seed;
  StackOptions opts = options;
  opts.warnings = nullptr;  // already warned
  const DenseMatrix meta = make_oof_meta_features(bases, x, y, opts);
  m.final_estimator = train_learner(final_estimator_spec(options.seed), FeatureMatrix::from_dense(meta), y);
  m.bases.resize(bases.size());
  parallel_for(bases.size(), options.threads, [&](std::size_t b) { m.bases[b] = train_learner(bases[b], x, y); });
  return m;
}

struct StackPrediction {
  std::vector<int> labels;
  DenseMatrix proba;  // columns follow the final estimator's classes
};

inline DenseMatrix stacked_meta_features(const StackModel& m, const FeatureMatrix& x) {
  if (x.cols() != m.input_dim()) {
    throw std::invalid_argument("predict_stacked: row width " + std::to_string(x.cols()) + " != model input " +
                                std::to_string(m.input_dim()));
  }
  DenseMatrix meta(x.rows(), meta_width(m.bases.size(), m.classes.size()));
  std::vector<std::size_t> rows(x.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (std::size_t b = 0; b < m.bases.size(); ++b) detail::write_meta_block(m.bases[b], x, m.classes, rows, b, meta);
  return meta;
}

inline StackPrediction predict_stacked(const StackModel& m, const FeatureMatrix& x) {
  const FeatureMatrix meta = FeatureMatrix::from_dense(stacked_meta_features(m, x));
  StackPrediction out;
  out.proba = m.final_estimator.predict_proba(meta);
  out.labels.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.labels[i] = m.final_estimator.classes()[argmax(out.proba.row(i))];
  return out;
}

}  // namespace triclass
