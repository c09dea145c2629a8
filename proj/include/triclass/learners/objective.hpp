#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace triclass {

/// A differentiable training objective over a flat parameter vector.
/// `same_piece` reports whether two parameter vectors lie on the same
/// smooth piece of the objective (always true for smooth losses).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double loss(std::span<const double> params) const = 0;
  virtual void gradient(std::span<const double> params, std::span<double> out) const = 0;
  virtual bool same_piece(std::span<const double>, std::span<const double>) const { return true; }
};

struct GradientCheckResult {
  double max_relative_deviation = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Compares the analytic gradient with central differences coordinate by
/// coordinate. Deviation is |a - n| / max(|a|, |n|, floor); the floor keeps
/// round-off on near-zero components from dominating.
inline GradientCheckResult check_gradient(const Objective& objective, std::span<const double> params,
                                          double h = 1e-5, double floor = 1e-3) {
  GradientCheckResult result;
  std::vector<double> analytic(objective.dimension());
  objective.gradient(params, analytic);
  std::vector<double> plus(params.begin(), params.end());
  std::vector<double> minus(params.begin(), params.end());
  for (std::size_t i = 0; i < params.size(); ++i) {
    plus[i] = params[i] + h;
    minus[i] = params[i] - h;
    if (!objective.same_piece(plus, minus)) {
      ++result.skipped;
    } else {
      const double numeric = (objective.loss(plus) - objective.loss(minus)) / (2.0 * h);
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
      result.max_relative_deviation = std::max(result.max_relative_deviation, std::abs(analytic[i] - numeric) / scale);
      ++result.checked;
    }
    plus[i] = params[i];
    minus[i] = params[i];
  }
  return result;
}

}  // namespace triclass
