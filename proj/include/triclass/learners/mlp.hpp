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

struct MlpParams {
  std::size_t hidden = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 30;
};

/// One ReLU hidden layer, softmax output. All parameters live in one flat
/// vector: W1 (input-major, inputs x hidden), b1, W2 (hidden x classes), b2.
struct MlpModel {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::vector<double> params;

  std::size_t w1() const { return 0; }
  std::size_t b1() const { return inputs * hidden; }
  std::size_t w2() const { return b1() + hidden; }
  std::size_t b2() const { return w2() + hidden * classes; }
  static std::size_t size(std::size_t inputs, std::size_t hidden, std::size_t classes) {
    return inputs * hidden + hidden + hidden * classes + classes;
  }

  /// Forward pass. `pre` receives hidden pre-activations, `out` the class
  /// probabilities.
  static void forward(std::span<const double> p, std::size_t inputs, std::size_t hidden, std::size_t classes,
                      const RowView& x, std::span<double> pre, std::span<double> out) {
    const std::size_t b1 = inputs * hidden;
    const std::size_t w2 = b1 + hidden;
    const std::size_t b2 = w2 + hidden * classes;
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(b1), p.begin() + static_cast<std::ptrdiff_t>(w2), pre.begin());
    accumulate_row(x, p.first(b1), hidden, pre);
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(b2), p.begin() + static_cast<std::ptrdiff_t>(b2 + classes),
              out.begin());
    for (std::size_t h = 0; h < hidden; ++h) {
      const double a = pre[h] > 0.0 ? pre[h] : 0.0;
      if (a == 0.0) continue;
      const double* w = p.data() + w2 + h * classes;
      for (std::size_t k = 0; k < classes; ++k) out[k] += a * w[k];
    }
    softmax(out);
  }

  /// Adds the gradient of -log p[label] (times `scale`) to `grad`.
  static void backward(std::span<const double> p, std::size_t inputs, std::size_t hidden, std::size_t classes,
                       const RowView& x, int label, std::span<const double> pre, std::span<const double> prob,
                       double scale, std::span<double> grad, std::span<double> dz, std::span<double> da) {
    const std::size_t b1 = inputs * hidden;
    const std::size_t w2 = b1 + hidden;
    const std::size_t b2 = w2 + hidden * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      dz[k] = (prob[k] - (static_cast<std::size_t>(label) == k ? 1.0 : 0.0)) * scale;
      grad[b2 + k] += dz[k];
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      const double* w = p.data() + w2 + h * classes;
      double* gw = grad.data() + w2 + h * classes;
      const double a = pre[h] > 0.0 ? pre[h] : 0.0;
      double back = 0.0;
      for (std::size_t k = 0; k < classes; ++k) {
        gw[k] += a * dz[k];
        back += w[k] * dz[k];
      }
      da[h] = pre[h] > 0.0 ? back : 0.0;
      grad[b1 + h] += da[h];
    }
    for (std::size_t j = 0; j < x.indices.size(); ++j) {
      double* g = grad.data() + static_cast<std::size_t>(x.indices[j]) * hidden;
      const double v = x.values[j];
      for (std::size_t h = 0; h < hidden; ++h) g[h] += v * da[h];
    }
  }

  nlohmann::json to_json() const {
    return {{"inputs", inputs}, {"hidden", hidden}, {"classes", classes}, {"params", params}};
  }
  static MlpModel from_json(const nlohmann::json& j) {
    return {j.at("inputs").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
            j.at("classes").get<std::size_t>(), j.at("params").get<std::vector<double>>()};
  }
  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Glorot-uniform weights, zero biases.
inline std::vector<double> init_mlp(std::size_t inputs, std::size_t hidden, std::size_t classes, Rng& rng) {
  std::vector<double> p(MlpModel::size(inputs, hidden, classes), 0.0);
  const double r1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double r2 = std::sqrt(6.0 / static_cast<double>(hidden + classes));
  for (std::size_t i = 0; i < inputs * hidden; ++i) p[i] = rng.uniform(-r1, r1);
  const std::size_t w2 = inputs * hidden + hidden;
  for (std::size_t i = 0; i < hidden * classes; ++i) p[w2 + i] = rng.uniform(-r2, r2);
  return p;
}

/// Mean cross-entropy of the network over a data set, unregularized.
class MlpObjective final : public Objective {
 public:
  MlpObjective(const FeatureMatrix& x, std::span<const int> y, std::size_t hidden, std::size_t classes)
      : x_(x), y_(y), hidden_(hidden), classes_(classes) {}

  std::size_t dimension() const override { return MlpModel::size(x_.cols(), hidden_, classes_); }

  double loss(std::span<const double> p) const override {
    std::vector<double> pre(hidden_);
    std::vector<double> prob(classes_);
    double total = 0.0;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      MlpModel::forward(p, x_.cols(), hidden_, classes_, x_.row(i), pre, prob);
      total -= std::log(std::max(prob[static_cast<std::size_t>(y_[i])], 1e-300));
    }
    return total / static_cast<double>(x_.rows());
  }

  void gradient(std::span<const double> p, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> pre(hidden_);
    std::vector<double> prob(classes_);
    std::vector<double> dz(classes_);
    std::vector<double> da(hidden_);
    const double scale = 1.0 / static_cast<double>(x_.rows());
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      MlpModel::forward(p, x_.cols(), hidden_, classes_, x_.row(i), pre, prob);
      MlpModel::backward(p, x_.cols(), hidden_, classes_, x_.row(i), y_[i], pre, prob, scale, out, dz, da);
    }
  }

  bool same_piece(std::span<const double> a, std::span<const double> b) const override {
    std::vector<double> pa(hidden_);
    std::vector<double> pb(hidden_);
    std::vector<double> prob(classes_);
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      MlpModel::forward(a, x_.cols(), hidden_, classes_, x_.row(i), pa, prob);
      MlpModel::forward(b, x_.cols(), hidden_, classes_, x_.row(i), pb, prob);
      for (std::size_t h = 0; h < hidden_; ++h) {
        if ((pa[h] > 0.0) != (pb[h] > 0.0)) return false;
      }
    }
    return true;
  }

 private:
  const FeatureMatrix& x_;
  std::span<const int> y_;
  std::size_t hidden_;
  std::size_t classes_;
};

/// Mini-batch SGD with classical momentum on mean batch cross-entropy.
inline MlpModel train_mlp(const MlpParams& params, const FeatureMatrix& x, std::span<const int> y,
                          std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  MlpModel m{x.cols(), params.hidden, classes, init_mlp(x.cols(), params.hidden, classes, rng)};
  std::vector<double> velocity(m.params.size(), 0.0);
  std::vector<double> grad(m.params.size(), 0.0);
  std::vector<double> pre(m.hidden);
  std::vector<double> prob(classes);
  std::vector<double> dz(classes);
  std::vector<double> da(m.hidden);
  std::vector<std::size_t> order(x.rows());
  const std::size_t batch = std::max<std::size_t>(1, params.batch_size);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto i = order[b];
        const auto r = x.row(i);
        MlpModel::forward(m.params, m.inputs, m.hidden, classes, r, pre, prob);
        MlpModel::backward(m.params, m.inputs, m.hidden, classes, r, y[i], pre, prob, scale, grad, dz, da);
      }
      for (std::size_t p = 0; p < m.params.size(); ++p) {
        velocity[p] = params.momentum * velocity[p] - params.learning_rate * grad[p];
        m.params[p] += velocity[p];
      }
    }
  }
  return m;
}

inline DenseMatrix predict_mlp(const MlpModel& m, const FeatureMatrix& x) {
  DenseMatrix out(x.rows(), m.classes);
  std::vector<double> pre(m.hidden);
  for (std::size_t i = 0; i < x.rows(); ++i) MlpModel::forward(m.params, m.inputs, m.hidden, m.classes, x.row(i), pre, out.row(i));
  return out;
}

}  // namespace triclass
