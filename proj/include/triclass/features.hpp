#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/matrix.hpp"
#include "triclass/text.hpp"
#include "triclass/vsm.hpp"

namespace triclass {

/// Per-column mean and standard deviation of the surface counts, fitted on
/// training data. A zero deviation is stored as 1 so the column becomes 0.
struct SurfaceScaler {
  std::array<double, SurfaceFeatures::kWidth> mean{};
  std::array<double, SurfaceFeatures::kWidth> stddev{1, 1, 1, 1, 1};

  static SurfaceScaler fit(const Corpus& corpus) {
    SurfaceScaler s;
    if (corpus.empty()) return s;
    const double n = static_cast<double>(corpus.size());
    std::vector<std::array<double, SurfaceFeatures::kWidth>> rows;
    rows.reserve(corpus.size());
    for (const auto& inst : corpus.instances) rows.push_back(surface_features(inst.text).as_array());
    for (std::size_t j = 0; j < SurfaceFeatures::kWidth; ++j) {
      double sum = 0.0;
      for (const auto& r : rows) sum += r[j];
      s.mean[j] = sum / n;
      double sq = 0.0;
      for (const auto& r : rows) sq += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
      const double sd = std::sqrt(sq / n);
      s.stddev[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  std::array<double, SurfaceFeatures::kWidth> apply(const SurfaceFeatures& f) const {
    auto a = f.as_array();
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = (a[j] - mean[j]) / stddev[j];
    return a;
  }

  nlohmann::json to_json() const { return {{"mean", mean}, {"stddev", stddev}}; }
  static SurfaceScaler from_json(const nlohmann::json& j) {
    SurfaceScaler s;
    s.mean = j.at("mean").get<std::array<double, SurfaceFeatures::kWidth>>();
    s.stddev = j.at("stddev").get<std::array<double, SurfaceFeatures::kWidth>>();
    return s;
  }
  friend bool operator==(const SurfaceScaler&, const SurfaceScaler&) = default;
};

/// Turns texts into learner rows: the L2-normalized term-frequency vector
/// over a chi2 feature set, followed by the five standardized surface counts.
class RowEncoder {
 public:
  static constexpr std::size_t kDefaultFeatures = 2000;

  RowEncoder() = default;
  RowEncoder(FeatureSet features, SurfaceScaler scaler) : features_(std::move(features)), scaler_(scaler) {}

  /// Selects features and fits the scaler on `train` only.
  static RowEncoder fit(const Corpus& train, Task task, std::size_t n = kDefaultFeatures,
                        FeatureUnit unit = FeatureUnit::token) {
    return RowEncoder(select_features(train, task, n, unit), SurfaceScaler::fit(train));
  }
  static RowEncoder fit(const Corpus& train, const FeatureStatistics& stats, Task task,
                        std::size_t n = kDefaultFeatures) {
    return RowEncoder(select_features(stats, task, n), SurfaceScaler::fit(train));
  }

  const FeatureSet& features() const { return features_; }
  const SurfaceScaler& scaler() const { return scaler_; }
  std::size_t width() const { return features_.size() + SurfaceFeatures::kWidth; }

  void append(FeatureMatrix& x, std::string_view text) const {
    const SparseVector v = vectorize_text(text, features_);
    const auto surface = scaler_.apply(surface_features(text));
    std::vector<std::uint32_t> idx(v.indices.begin(), v.indices.end());
    std::vector<double> val(v.values.begin(), v.values.end());
    for (std::size_t j = 0; j < surface.size(); ++j) {
      idx.push_back(static_cast<std::uint32_t>(features_.size() + j));
      val.push_back(surface[j]);
    }
    x.add_row(idx, val);
  }

  FeatureMatrix encode(const Corpus& corpus) const {
    FeatureMatrix x(width());
    for (const auto& inst : corpus.instances) append(x, inst.text);
    return x;
  }

  nlohmann::json to_json() const {
    return {{"features", feature_set_to_json(features_)}, {"surface", scaler_.to_json()}};
  }
  static RowEncoder from_json(const nlohmann::json& j) {
    return RowEncoder(feature_set_from_json(j.at("features")), SurfaceScaler::from_json(j.at("surface")));
  }

 private:
  FeatureSet features_;
  SurfaceScaler scaler_;
};

}  // namespace triclass
