#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "triclass/matrix.hpp"

namespace triclass {

struct NaiveBayesParams {
  double alpha = 1.0;  // Laplace smoothing
};

/// Multinomial naive Bayes in log space. Negative feature values (the
/// standardized surface counts can be negative) are treated as zero counts.
struct NaiveBayesModel {
  std::vector<double> log_prior;
  DenseMatrix log_prob;  // classes x features

  nlohmann::json to_json() const {
    return {{"log_prior", log_prior}, {"log_prob", {{"rows", log_prob.rows}, {"cols", log_prob.cols}, {"data", log_prob.data}}}};
  }
  static NaiveBayesModel from_json(const nlohmann::json& j) {
    NaiveBayesModel m;
    m.log_prior = j.at("log_prior").get<std::vector<double>>();
    const auto& lp = j.at("log_prob");
    m.log_prob = DenseMatrix(lp.at("rows").get<std::size_t>(), lp.at("cols").get<std::size_t>());
    m.log_prob.data = lp.at("data").get<std::vector<double>>();
    return m;
  }
  friend bool operator==(const NaiveBayesModel&, const NaiveBayesModel&) = default;
};

inline NaiveBayesModel train_naive_bayes(const NaiveBayesParams& params, const FeatureMatrix& x,
                                         std::span<const int> y, std::size_t classes) {
  const std::size_t d = x.cols();
  DenseMatrix counts(classes, d);
  std::vector<double> class_docs(classes, 0.0);
  // Canonical order makes the floating-point sums independent of row order.
  for (auto i : canonical_order(x, y)) {
    const auto c = static_cast<std::size_t>(y[i]);
    class_docs[c] += 1.0;
    const auto r = x.row(i);
    for (std::size_t j = 0; j < r.indices.size(); ++j) {
      if (r.values[j] > 0.0) counts(c, r.indices[j]) += r.values[j];
    }
  }
  NaiveBayesModel m;
  m.log_prior.resize(classes);
  m.log_prob = DenseMatrix(classes, d);
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < classes; ++c) {
    m.log_prior[c] = std::log(class_docs[c] / n);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += counts(c, j);
    const double denom = std::log(total + params.alpha * static_cast<double>(d));
    for (std::size_t j = 0; j < d; ++j) m.log_prob(c, j) = std::log(counts(c, j) + params.alpha) - denom;
  }
  return m;
}

inline DenseMatrix predict_naive_bayes(const NaiveBayesModel& m, const FeatureMatrix& x) {
  const std::size_t classes = m.log_prior.size();
  DenseMatrix out(x.rows(), classes);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.row(i);
    const auto r = x.row(i);
    for (std::size_t c = 0; c < classes; ++c) {
      double s = m.log_prior[c];
      for (std::size_t j = 0; j < r.indices.size(); ++j) {
        if (r.values[j] > 0.0) s += r.values[j] * m.log_prob(c, r.indices[j]);
      }
      row[c] = s;
    }
    softmax(row);
  }
  return out;
}

}  // namespace triclass
