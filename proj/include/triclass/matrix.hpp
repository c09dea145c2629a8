#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace triclass {

/// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;
};

struct RowView {
  std::span<const std::uint32_t> indices;
  std::span<const double> values;

  /// Value at column j (zero when absent).
  double at(std::uint32_t j) const {
    auto it = std::lower_bound(indices.begin(), indices.end(), j);
    if (it == indices.end() || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - indices.begin())];
  }
};

/// Compressed sparse rows. Learners consume this; text features are sparse
/// while the handful of dense columns are simply stored explicitly.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t cols) : cols_(cols) {}

  std::size_t rows() const { return row_ptr_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  /// Appends a row. Indices must be strictly increasing; zeros are skipped.
  void add_row(std::span<const std::uint32_t> indices, std::span<const double> values) {
    if (indices.size() != values.size()) throw std::invalid_argument("row indices/values size mismatch");
    for (std::size_t j = 0; j < indices.size(); ++j) {
      if (indices[j] >= cols_) throw std::invalid_argument("column index out of range");
      if (j > 0 && indices[j] <= indices[j - 1]) throw std::invalid_argument("row indices must increase");
      if (values[j] == 0.0) continue;
      indices_.push_back(indices[j]);
      values_.push_back(values[j]);
    }
    row_ptr_.push_back(values_.size());
  }

  void add_dense_row(std::span<const double> values) {
    if (values.size() != cols_) throw std::invalid_argument("dense row width mismatch");
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j] == 0.0) continue;
      indices_.push_back(static_cast<std::uint32_t>(j));
      values_.push_back(values[j]);
    }
    row_ptr_.push_back(values_.size());
  }

  RowView row(std::size_t i) const {
    const std::size_t b = row_ptr_[i];
    const std::size_t e = row_ptr_[i + 1];
    return {{indices_.data() + b, e - b}, {values_.data() + b, e - b}};
  }

  std::vector<double> dense_row(std::size_t i) const {
    std::vector<double> out(cols_, 0.0);
    const auto r = row(i);
    for (std::size_t j = 0; j < r.indices.size(); ++j) out[r.indices[j]] = r.values[j];
    return out;
  }

  FeatureMatrix select_rows(std::span<const std::size_t> which) const {
    FeatureMatrix out(cols_);
    for (auto i : which) {
      const auto r = row(i);
      out.add_row(r.indices, r.values);
    }
    return out;
  }

  bool has_non_finite() const {
    return std::any_of(values_.begin(), values_.end(), [](double v) { return !std::isfinite(v); });
  }

  static FeatureMatrix from_dense(const DenseMatrix& m) {
    FeatureMatrix out(m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) out.add_dense_row(m.row(i));
    return out;
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

/// Sparse row times dense column-major block: out[h] += sum_j x_j * w[j*h_stride + h].
inline void accumulate_row(const RowView& x, std::span<const double> weights, std::size_t width,
                           std::span<double> out) {
  for (std::size_t j = 0; j < x.indices.size(); ++j) {
    const double v = x.values[j];
    const double* w = weights.data() + static_cast<std::size_t>(x.indices[j]) * width;
    for (std::size_t h = 0; h < width; ++h) out[h] += v * w[h];
  }
}

/// In-place softmax, numerically stabilized.
inline void softmax(std::span<double> z) {
  if (z.empty()) return;
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// A row order that depends only on row contents and labels, used by
/// learners whose result must not depend on the input order.
inline std::vector<std::size_t> canonical_order(const FeatureMatrix& x, std::span<const int> y) {
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = x.row(a);
    const auto rb = x.row(b);
    const std::size_t n = std::min(ra.indices.size(), rb.indices.size());
    for (std::size_t j = 0; j < n; ++j) {
      if (ra.indices[j] != rb.indices[j]) return ra.indices[j] < rb.indices[j];
      if (ra.values[j] != rb.values[j]) return ra.values[j] < rb.values[j];
    }
    if (ra.indices.size() != rb.indices.size()) return ra.indices.size() < rb.indices.size();
    return y[a] < y[b];
  });
  return order;
}

}  // namespace triclass
