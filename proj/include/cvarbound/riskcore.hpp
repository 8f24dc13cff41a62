#pragma once

// Exact VaR / CVaR on finite samples and on piecewise-constant CDFs.
//
// Conventions (upper-tail risk, large values are bad):
//   VaR_a(F)  = inf{ y : F(y) >  1 - a }
//   CVaR_a(F) = (1/a) * integral_{1-a}^{1} Q(v) dv,  Q(v) = inf{ y : F(y) >= v }
// For step CDFs the quantile is a step function of v, so every CVaR here is a
// closed-form finite sum; there is no quadrature in this module.

#include <cstddef>
#include <span>
#include <vector>

namespace cvarbound {

// Tail probability mass a in (0, 1].
class TailLevel {
 public:
  explicit TailLevel(double alpha);
  double value() const noexcept { return alpha_; }

 private:
  double alpha_;
};

// Finite sample with a cached ascending view (the order statistics).
class SampleBatch {
 public:
  explicit SampleBatch(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> sorted() const noexcept { return sorted_; }
  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

// Right-continuous piecewise-constant CDF:
//   F(y) = 0 for y < y_1,  F(y) = p_j on [y_j, y_{j+1}),  F(y) = 1 for y >= y_k.
class StepCdf {
 public:
  // Validates: breakpoints finite and strictly increasing, levels in (0, 1],
  // nondecreasing, last level exactly 1.
  StepCdf(std::vector<double> breakpoints, std::vector<double> levels);

  // Builds a valid StepCdf from candidate (y, level) pairs sorted by y:
  // levels are clamped to [0, 1], zero-level points dropped, and runs of
  // equal levels collapsed onto their first breakpoint. The last level must
  // already be 1.
  static StepCdf from_candidates(std::span<const double> ys, std::span<const double> levels);

  // Point mass at y.
  static StepCdf point_mass(double y);

  double operator()(double y) const noexcept;
  // lim_{t -> y-} F(t).
  double left_limit(double y) const noexcept;

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return breakpoints_.size(); }
  double min_support() const noexcept { return breakpoints_.front(); }
  double max_support() const noexcept { return breakpoints_.back(); }

  // inf{ y : F(y) >= v } for v in (0, 1]; the lowest breakpoint for v <= 0.
  double quantile(double v) const noexcept;
  // inf{ y : F(y) > v } for v in [0, 1); +inf for v >= 1.
  double quantile_strict(double v) const noexcept;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
};

double var_of_cdf(const StepCdf& cdf, TailLevel level);
double cvar_of_cdf(const StepCdf& cdf, TailLevel level);
double mean_of_cdf(const StepCdf& cdf);

// inf_w { w + 1/(n a) * sum (X_i - w)^+ }, minimised over the sample points.
double cvar_inf_form(const SampleBatch& batch, TailLevel level);

// Z_n - (1/a) * sum_{i=1}^{n-1} (Z_{i+1} - Z_i) * (i/n - (1 - a))^+
double cvar_sorted_form(const SampleBatch& batch, TailLevel level);

}  // namespace cvarbound
