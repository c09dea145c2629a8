#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "triclass/learners/objective.hpp"
#include "triclass/matrix.hpp"
#include "triclass/random.hpp"

namespace triclass {

/// Weights laid out feature-major: weights[j * classes + k].
struct LinearModel {
  std::size_t classes = 0;
  std::size_t features = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  void scores(const RowView& x, std::span<double> out) const {
    std::copy(bias.begin(), bias.end(), out.begin());
    accumulate_row(x, weights, classes, out);
  }

  nlohmann::json to_json() const {
    return {{"classes", classes}, {"features", features}, {"weights", weights}, {"bias", bias}};
  }
  static LinearModel from_json(const nlohmann::json& j) {
    return {j.at("classes").get<std::size_t>(), j.at("features").get<std::size_t>(),
            j.at("weights").get<std::vector<double>>(), j.at("bias").get<std::vector<double>>()};
  }
  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Softmax over the linear scores.
inline DenseMatrix predict_linear(const LinearModel& m, const FeatureMatrix& x) {
  DenseMatrix out(x.rows(), m.classes);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = out.row(i);
    m.scores(x.row(i), row);
    softmax(row);
  }
  return out;
}

// --------------------------------------------------------------------------
// Multinomial logistic regression

struct LogisticParams {
  double lambda = 1e-4;
  double tolerance = 1e-6;
  std::size_t max_iterations = 500;
};

/// Mean cross-entropy plus (lambda/2)|W|^2; biases are not penalized.
/// Parameters: weights (feature-major) followed by the class biases.
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(const FeatureMatrix& x, std::span<const int> y, std::size_t classes, double lambda)
      : x_(x), y_(y), classes_(classes), lambda_(lambda), order_(canonical_order(x, y)) {}

  std::size_t dimension() const override { return (x_.cols() + 1) * classes_; }

  double loss(std::span<const double> params) const override {
    std::vector<double> z(classes_);
    double total = 0.0;
    for (auto i : order_) {
      logits(params, i, z);
      const double m = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (double v : z) s += std::exp(v - m);
      total += m + std::log(s) - z[static_cast<std::size_t>(y_[i])];
    }
    double reg = 0.0;
    for (std::size_t p = 0; p < x_.cols() * classes_; ++p) reg += params[p] * params[p];
    return total / static_cast<double>(x_.rows()) + 0.5 * lambda_ * reg;
  }

  void gradient(std::span<const double> params, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> z(classes_);
    const double inv_n = 1.0 / static_cast<double>(x_.rows());
    double* bias_grad = out.data() + x_.cols() * classes_;
    for (auto i : order_) {
      logits(params, i, z);
      softmax(z);
      z[static_cast<std::size_t>(y_[i])] -= 1.0;
      const auto r = x_.row(i);
      for (std::size_t j = 0; j < r.indices.size(); ++j) {
        double* g = out.data() + static_cast<std::size_t>(r.indices[j]) * classes_;
        for (std::size_t k = 0; k < classes_; ++k) g[k] += r.values[j] * z[k] * inv_n;
      }
      for (std::size_t k = 0; k < classes_; ++k) bias_grad[k] += z[k] * inv_n;
    }
    for (std::size_t p = 0; p < x_.cols() * classes_; ++p) out[p] += lambda_ * params[p];
  }

 private:
  void logits(std::span<const double> params, std::size_t i, std::span<double> z) const {
    const double* bias = params.data() + x_.cols() * classes_;
    std::copy(bias, bias + classes_, z.begin());
    accumulate_row(x_.row(i), params.first(x_.cols() * classes_), classes_, z);
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  std::size_t classes_;
  double lambda_;
  std::vector<std::size_t> order_;
};

/// Full-batch gradient descent from zero with a backtracking (Armijo) step.
inline LinearModel train_logistic(const LogisticParams& params, const FeatureMatrix& x, std::span<const int> y,
                                  std::size_t classes) {
  const LogisticObjective objective(x, y, classes, params.lambda);
  std::vector<double> theta(objective.dimension(), 0.0);
  std::vector<double> grad(theta.size());
  std::vector<double> trial(theta.size());
  double step = 1.0;
  double current = objective.loss(theta);
  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    objective.gradient(theta, grad);
    const double norm2 = std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0);
    if (std::sqrt(norm2) <= params.tolerance) break;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (std::size_t p = 0; p < theta.size(); ++p) trial[p] = theta[p] - step * grad[p];
      const double next = objective.loss(trial);
      if (next <= current - 1e-4 * step * norm2) {
        theta.swap(trial);
        current = next;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(step * 2.0, 1e4);
  }
  LinearModel m;
  m.classes = classes;
  m.features = x.cols();
  m.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(x.cols() * classes));
  m.bias.assign(theta.begin() + static_cast<std::ptrdiff_t>(x.cols() * classes), theta.end());
  return m;
}

// --------------------------------------------------------------------------
// Linear SVM, one-vs-rest hinge loss trained with Pegasos-style SGD

struct LinearSvmParams {
  double lambda = 1e-4;
  std::size_t epochs = 20;
};

/// Sum over classes of (lambda/2)|w_c|^2 + mean hinge(1 - y_ic (w_c.x_i + b_c)).
/// The bias is an augmented constant feature, so it is penalized too.
class SvmObjective final : public Objective {
 public:
  SvmObjective(const FeatureMatrix& x, std::span<const int> y, std::size_t classes, double lambda)
      : x_(x), y_(y), classes_(classes), lambda_(lambda) {}

  std::size_t dimension() const override { return (x_.cols() + 1) * classes_; }

  double loss(std::span<const double> params) const override {
    std::vector<double> z(classes_);
    double hinge = 0.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      scores(params, i, z);
      for (std::size_t k = 0; k < classes_; ++k) hinge += std::max(0.0, 1.0 - sign(i, k) * z[k]);
    }
    double reg = 0.0;
    for (double p : params) reg += p * p;
    return hinge / static_cast<double>(x_.rows()) + 0.5 * lambda_ * reg;
  }

  void gradient(std::span<const double> params, std::span<double> out) const override {
    for (std::size_t p = 0; p < params.size(); ++p) out[p] = lambda_ * params[p];
    std::vector<double> z(classes_);
    const double inv_n = 1.0 / static_cast<double>(x_.rows());
    double* bias_grad = out.data() + x_.cols() * classes_;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      scores(params, i, z);
      const auto r = x_.row(i);
      for (std::size_t k = 0; k < classes_; ++k) {
        const double s = sign(i, k);
        if (s * z[k] >= 1.0) continue;
        for (std::size_t j = 0; j < r.indices.size(); ++j) {
          out[static_cast<std::size_t>(r.indices[j]) * classes_ + k] -= s * r.values[j] * inv_n;
        }
        bias_grad[k] -= s * inv_n;
      }
    }
  }

  bool same_piece(std::span<const double> a, std::span<const double> b) const override {
    std::vector<double> za(classes_);
    std::vector<double> zb(classes_);
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      scores(a, i, za);
      scores(b, i, zb);
      for (std::size_t k = 0; k < classes_; ++k) {
        if ((sign(i, k) * za[k] < 1.0) != (sign(i, k) * zb[k] < 1.0)) return false;
      }
    }
    return true;
  }

 private:
  double sign(std::size_t i, std::size_t k) const { return static_cast<std::size_t>(y_[i]) == k ? 1.0 : -1.0; }

  void scores(std::span<const double> params, std::size_t i, std::span<double> z) const {
    const double* bias = params.data() + x_.cols() * classes_;
    std::copy(bias, bias + classes_, z.begin());
    accumulate_row(x_.row(i), params.first(x_.cols() * classes_), classes_, z);
  }

  const FeatureMatrix& x_;
  std::span<const int> y_;
  std::size_t classes_;
  double lambda_;
};

inline LinearModel train_linear_svm(const LinearSvmParams& params, const FeatureMatrix& x, std::span<const int> y,
                                    std::size_t classes, std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  LinearModel m;
  m.classes = classes;
  m.features = d;
  m.weights.assign(d * classes, 0.0);
  m.bias.assign(classes, 0.0);

  std::vector<std::size_t> order(n);
  std::vector<double> v(d);
  for (std::size_t k = 0; k < classes; ++k) {
    Rng rng(derive_seed(seed, k));
    std::fill(v.begin(), v.end(), 0.0);
    double vb = 0.0;
    double scale = 1.0;  // w = scale * v
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span(order));
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (params.lambda * static_cast<double>(t));
        const double label = static_cast<std::size_t>(y[i]) == k ? 1.0 : -1.0;
        const auto r = x.row(i);
        double dotv = vb;
        for (std::size_t j = 0; j < r.indices.size(); ++j) dotv += v[r.indices[j]] * r.values[j];
        const double margin = label * scale * dotv;
        scale *= 1.0 - eta * params.lambda;
        if (scale <= 0.0) {
          std::fill(v.begin(), v.end(), 0.0);
          vb = 0.0;
          scale = 1.0;
        }
        if (margin < 1.0) {
          const double step = eta * label / scale;
          for (std::size_t j = 0; j < r.indices.size(); ++j) v[r.indices[j]] += step * r.values[j];
          vb += step;
        }
        if (scale < 1e-9) {
          for (double& w : v) w *= scale;
          vb *= scale;
          scale = 1.0;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) m.weights[j * classes + k] = scale * v[j];
    m.bias[k] = scale * vb;
  }
  return m;
}

}  // namespace triclass
