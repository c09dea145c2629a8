#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "triclass/matrix.hpp"
#include "triclass/random.hpp"

namespace triclass {

/// Per-feature histogram binning of a FeatureMatrix. A feature with at most
/// `max_bins` distinct values (zero included) gets one bin per value, so
/// split search over bins is exact; denser features get quantile bins.
class BinnedMatrix {
 public:
  static constexpr std::size_t kDefaultMaxBins = 64;

  BinnedMatrix(const FeatureMatrix& x, std::size_t max_bins = kDefaultMaxBins) : rows_(x.rows()), cols_(x.cols()) {
    if (max_bins < 2) throw std::invalid_argument("max_bins must be at least 2");
    std::vector<std::vector<double>> columns(cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto r = x.row(i);
      for (std::size_t j = 0; j < r.indices.size(); ++j) columns[r.indices[j]].push_back(r.values[j]);
    }
    cuts_.resize(cols_);
    zero_bin_.resize(cols_);
    offsets_.resize(cols_ + 1, 0);
    for (std::size_t f = 0; f < cols_; ++f) {
      auto& values = columns[f];
      const std::size_t zeros = rows_ - values.size();
      if (zeros > 0) values.push_back(0.0);
      std::sort(values.begin(), values.end());
      // Distinct values with multiplicities.
      std::vector<std::pair<double, std::size_t>> distinct;
      for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t mult = (values[i] == 0.0 && zeros > 0) ? zeros : 1;
        if (!distinct.empty() && distinct.back().first == values[i]) {
          distinct.back().second += mult;
        } else {
          distinct.emplace_back(values[i], mult);
        }
      }
      auto& cuts = cuts_[f];
      if (distinct.size() <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
          cuts.push_back(midpoint(distinct[i].first, distinct[i + 1].first));
        }
      } else {
        const double per_bin = static_cast<double>(rows_) / static_cast<double>(max_bins);
        std::size_t cumulative = 0;
        for (std::size_t i = 0; i + 1 < distinct.size() && cuts.size() + 1 < max_bins; ++i) {
          cumulative += distinct[i].second;
          if (static_cast<double>(cumulative) >= per_bin * static_cast<double>(cuts.size() + 1)) {
            cuts.push_back(midpoint(distinct[i].first, distinct[i + 1].first));
          }
        }
      }
      zero_bin_[f] = bin_of(f, 0.0);
      offsets_[f + 1] = offsets_[f] + cuts.size() + 1;
    }
    row_ptr_.reserve(rows_ + 1);
    row_ptr_.push_back(0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto r = x.row(i);
      for (std::size_t j = 0; j < r.indices.size(); ++j) {
        features_.push_back(r.indices[j]);
        bins_.push_back(static_cast<std::uint16_t>(bin_of(r.indices[j], r.values[j])));
      }
      row_ptr_.push_back(features_.size());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t bin_count(std::size_t f) const { return cuts_[f].size() + 1; }
  std::size_t total_bins() const { return offsets_.back(); }
  std::size_t offset(std::size_t f) const { return offsets_[f]; }
  std::size_t zero_bin(std::size_t f) const { return zero_bin_[f]; }
  double cut(std::size_t f, std::size_t bin) const { return cuts_[f][bin]; }

  std::span<const std::uint32_t> row_features(std::size_t i) const {
    return {features_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const std::uint16_t> row_bins(std::size_t i) const {
    return {bins_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  std::size_t bin_at(std::size_t i, std::uint32_t f) const {
    const auto feats = row_features(i);
    auto it = std::lower_bound(feats.begin(), feats.end(), f);
    if (it == feats.end() || *it != f) return zero_bin_[f];
    return row_bins(i)[static_cast<std::size_t>(it - feats.begin())];
  }

 private:
  static double midpoint(double a, double b) { return a + (b - a) / 2.0; }

  /// Number of cuts strictly below v, so v <= cut[b] exactly when bin(v) <= b.
  std::size_t bin_of(std::size_t f, double v) const {
    const auto& cuts = cuts_[f];
    return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
  }

  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::vector<double>> cuts_;
  std::vector<std::size_t> zero_bin_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> features_;
  std::vector<std::uint16_t> bins_;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when value <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> value;  // class distribution, or a single regression value

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  const std::vector<double>& leaf(const RowView& x) const {
    std::size_t n = 0;
    while (nodes[n].feature >= 0) {
      const auto& node = nodes[n];
      n = static_cast<std::size_t>(x.at(static_cast<std::uint32_t>(node.feature)) <= node.threshold ? node.left
                                                                                                     : node.right);
    }
    return nodes[n].value;
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].feature < 0) continue;
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
    return best;
  }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& n : nodes) out.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return out;
  }

  static Tree from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& n : j) {
      t.nodes.push_back({n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                         n.at(3).get<std::int32_t>(), n.at(4).get<std::vector<double>>()});
    }
    return t;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

enum class SplitCriterion { gini, squared_error };

/// What a tree is fit to. Rows with zero weight never enter the tree.
struct TreeTargets {
  SplitCriterion criterion = SplitCriterion::gini;
  std::size_t classes = 0;           // gini
  std::span<const int> labels;       // gini: class index per row
  std::span<const double> values;    // squared_error: target per row
  std::span<const double> weights;   // per row
};

struct TreeParams {
  std::size_t max_depth = 16;
  /// Features examined per split among those non-constant in the node;
  /// 0 means all of them.
  std::size_t max_features = 0;
  std::size_t min_samples_split = 2;
};

/// Leaf value for squared-error trees, given the rows that reached the leaf.
using LeafValueFn = std::function<double(std::span<const std::uint32_t>)>;

/// Depth-first CART builder over histogram bins. Candidate features are
/// always evaluated in ascending index order and the first strictly best
/// split wins, so a tree grown with every feature is independent of the
/// random stream.
class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& x, const TreeTargets& targets)
      : x_(x), t_(targets),
        width_(targets.criterion == SplitCriterion::gini ? targets.classes : 2) {
    if (t_.criterion == SplitCriterion::gini && (t_.classes == 0 || t_.labels.size() != x.rows())) {
      throw std::invalid_argument("tree: bad classification targets");
    }
    if (t_.criterion == SplitCriterion::squared_error && t_.values.size() != x.rows()) {
      throw std::invalid_argument("tree: bad regression targets");
    }
    if (t_.weights.size() != x.rows()) throw std::invalid_argument("tree: weight count mismatch");
    hist_.assign(x.total_bins() * width_, 0.0);
    counts_.assign(x.total_bins(), 0);
    stamp_.assign(x.cols(), 0);
  }

  /// Grows a tree on `rows`. When `leaf_of_row` is non-empty it receives
  /// the leaf node index for each grown row.
  Tree build(std::vector<std::uint32_t> rows, const TreeParams& params, Rng* rng,
             const LeafValueFn& leaf_value = {}, std::span<std::int32_t> leaf_of_row = {}) {
    Tree tree;
    rows.erase(std::remove_if(rows.begin(), rows.end(), [&](std::uint32_t r) { return t_.weights[r] <= 0.0; }),
               rows.end());
    if (rows.empty()) throw std::invalid_argument("tree: no rows with positive weight");
    struct Pending {
      std::size_t node;
      std::size_t depth;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Pending> stack{{0, 0, 0, rows.size()}};
    tree.nodes.emplace_back();
    std::vector<double> total(width_);
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      const std::span<std::uint32_t> node_rows(rows.data() + p.begin, p.end - p.begin);
      node_stats(node_rows, total);

      Split split;
      if (p.depth < params.max_depth && node_rows.size() >= params.min_samples_split && !is_pure(node_rows, total)) {
        split = find_split(node_rows, total, params, rng);
      }
      if (split.feature < 0) {
        make_leaf(tree.nodes[p.node], node_rows, total, leaf_value);
        if (!leaf_of_row.empty()) {
          for (auto r : node_rows) leaf_of_row[r] = static_cast<std::int32_t>(p.node);
        }
        continue;
      }
      const auto f = static_cast<std::uint32_t>(split.feature);
      const auto mid = std::stable_partition(node_rows.begin(), node_rows.end(),
                                             [&](std::uint32_t r) { return x_.bin_at(r, f) <= split.bin; });
      const std::size_t split_at = p.begin + static_cast<std::size_t>(mid - node_rows.begin());
      const auto left = tree.nodes.size();
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[p.node];
      node.feature = split.feature;
      node.threshold = x_.cut(f, split.bin);
      node.left = static_cast<std::int32_t>(left);
      node.right = static_cast<std::int32_t>(left + 1);
      stack.push_back({left + 1, p.depth + 1, split_at, p.end});
      stack.push_back({left, p.depth + 1, p.begin, split_at});
    }
    return tree;
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    std::size_t bin = 0;
  };

  void add_row(std::uint32_t r, double* dst) const {
    const double w = t_.weights[r];
    if (t_.criterion == SplitCriterion::gini) {
      dst[t_.labels[r]] += w;
    } else {
      dst[0] += w;
      dst[1] += w * t_.values[r];
    }
  }

  double proxy(const double* s) const {
    if (t_.criterion == SplitCriterion::gini) {
      double w = 0.0;
      double sq = 0.0;
      for (std::size_t k = 0; k < width_; ++k) {
        w += s[k];
        sq += s[k] * s[k];
      }
      return w > 0.0 ? sq / w : 0.0;
    }
    return s[0] > 0.0 ? s[1] * s[1] / s[0] : 0.0;
  }

  double weight_of(const double* s) const {
    if (t_.criterion == SplitCriterion::squared_error) return s[0];
    double w = 0.0;
    for (std::size_t k = 0; k < width_; ++k) w += s[k];
    return w;
  }

  void node_stats(std::span<const std::uint32_t> rows, std::vector<double>& total) const {
    std::fill(total.begin(), total.end(), 0.0);
    for (auto r : rows) add_row(r, total.data());
  }

  bool is_pure(std::span<const std::uint32_t> rows, const std::vector<double>& total) const {
    if (t_.criterion == SplitCriterion::gini) {
      return std::count_if(total.begin(), total.end(), [](double v) { return v > 0.0; }) <= 1;
    }
    const double first = t_.values[rows.front()];
    return std::all_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return t_.values[r] == first; });
  }

  void make_leaf(TreeNode& node, std::span<const std::uint32_t> rows, const std::vector<double>& total,
                 const LeafValueFn& leaf_value) const {
    node.feature = -1;
    if (t_.criterion == SplitCriterion::gini) {
      const double w = weight_of(total.data());
      node.value.resize(width_);
      for (std::size_t k = 0; k < width_; ++k) node.value[k] = total[k] / w;
    } else if (leaf_value) {
      node.value = {leaf_value(rows)};
    } else {
      node.value = {total[1] / total[0]};
    }
  }

  Split find_split(std::span<const std::uint32_t> rows, const std::vector<double>& total, const TreeParams& params,
                   Rng* rng) {
    ++epoch_;
    touched_.clear();
    for (auto r : rows) {
      const auto feats = x_.row_features(r);
      const auto bins = x_.row_bins(r);
      for (std::size_t j = 0; j < feats.size(); ++j) {
        const auto f = feats[j];
        const std::size_t base = x_.offset(f);
        if (stamp_[f] != epoch_) {
          stamp_[f] = epoch_;
          touched_.push_back(f);
          std::fill_n(hist_.begin() + static_cast<std::ptrdiff_t>(base * width_), x_.bin_count(f) * width_, 0.0);
          std::fill_n(counts_.begin() + static_cast<std::ptrdiff_t>(base), x_.bin_count(f), 0);
        }
        add_row(r, &hist_[(base + bins[j]) * width_]);
        ++counts_[base + bins[j]];
      }
    }
    // Complete each touched feature's zero bin and keep the non-constant ones.
    candidates_.clear();
    for (auto f : touched_) {
      const std::size_t base = x_.offset(f);
      const std::size_t nb = x_.bin_count(f);
      const std::size_t zb = base + x_.zero_bin(f);
      std::size_t nonzero_rows = 0;
      for (std::size_t b = 0; b < nb; ++b) nonzero_rows += counts_[base + b];
      // Quantile bins may already hold small nonzero values in the zero bin.
      counts_[zb] += static_cast<std::uint32_t>(rows.size() - nonzero_rows);
      for (std::size_t k = 0; k < width_; ++k) {
        double s = total[k];
        for (std::size_t b = 0; b < nb; ++b) s -= hist_[(base + b) * width_ + k];
        hist_[zb * width_ + k] += s;
      }
      std::size_t occupied = 0;
      for (std::size_t b = 0; b < nb; ++b) occupied += counts_[base + b] > 0 ? 1 : 0;
      if (occupied >= 2) candidates_.push_back(f);
    }
    std::sort(candidates_.begin(), candidates_.end());
    if (params.max_features != 0 && params.max_features < candidates_.size()) {
      if (rng == nullptr) throw std::invalid_argument("tree: feature sampling needs a random stream");
      for (std::size_t i = 0; i < params.max_features; ++i) {
        const std::size_t j = i + rng->below(candidates_.size() - i);
        std::swap(candidates_[i], candidates_[j]);
      }
      candidates_.resize(params.max_features);
      std::sort(candidates_.begin(), candidates_.end());
    }

    const double parent = proxy(total.data());
    double best_gain = 1e-12 * weight_of(total.data());
    Split best;
    std::vector<double> left(width_);
    std::vector<double> right(width_);
    for (auto f : candidates_) {
      const std::size_t base = x_.offset(f);
      const std::size_t nb = x_.bin_count(f);
      std::fill(left.begin(), left.end(), 0.0);
      std::size_t left_rows = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        const double* h = &hist_[(base + b) * width_];
        for (std::size_t k = 0; k < width_; ++k) left[k] += h[k];
        left_rows += counts_[base + b];
        if (counts_[base + b] == 0) continue;
        if (left_rows == 0 || left_rows == rows.size()) continue;
        for (std::size_t k = 0; k < width_; ++k) right[k] = total[k] - left[k];
        const double gain = proxy(left.data()) + proxy(right.data()) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best = {static_cast<std::int32_t>(f), b};
        }
      }
    }
    return best;
  }

  const BinnedMatrix& x_;
  TreeTargets t_;
  std::size_t width_;
  std::vector<double> hist_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> candidates_;
};

inline std::vector<std::uint32_t> all_rows(std::size_t n) {
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0U);
  return rows;
}

}  // namespace triclass
