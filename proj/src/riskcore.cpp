#include "cvarbound/riskcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cvarbound/error.hpp"

namespace cvarbound {

TailLevel::TailLevel(double alpha) : alpha_(alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "invalid_level",
          "tail level must lie in (0, 1], got " + std::to_string(alpha));
}

SampleBatch::SampleBatch(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), "empty_batch", "sample batch must contain at least one value");
  for (double v : values_) {
    require(std::isfinite(v), "nonfinite_sample", "sample values must be finite");
  }
  sorted_ = values_;
  std::sort(sorted_.begin(), sorted_.end());
}

StepCdf::StepCdf(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
  require(!breakpoints_.empty(), "invalid_cdf", "step CDF needs at least one breakpoint");
  require(breakpoints_.size() == levels_.size(), "invalid_cdf",
          "step CDF breakpoints and levels differ in length");
  double prev_y = -std::numeric_limits<double>::infinity();
  double prev_p = 0.0;
  for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
    require(std::isfinite(breakpoints_[j]), "invalid_cdf", "step CDF breakpoints must be finite");
    require(breakpoints_[j] > prev_y, "invalid_cdf", "step CDF breakpoints must be strictly increasing");
    require(levels_[j] > 0.0 && levels_[j] <= 1.0, "invalid_cdf", "step CDF levels must lie in (0, 1]");
    require(levels_[j] >= prev_p, "invalid_cdf", "step CDF levels must be nondecreasing");
    prev_y = breakpoints_[j];
    prev_p = levels_[j];
  }
  require(levels_.back() == 1.0, "invalid_cdf", "step CDF final level must be exactly 1");
}

StepCdf StepCdf::from_candidates(std::span<const double> ys, std::span<const double> levels) {
  require(ys.size() == levels.size(), "invalid_cdf", "candidate breakpoints and levels differ in length");
  std::vector<double> out_y;
  std::vector<double> out_p;
  out_y.reserve(ys.size());
  out_p.reserve(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double p = std::clamp(levels[j], 0.0, 1.0);
    if (out_y.empty() && p <= 0.0) continue;
    if (!out_y.empty()) {
      require(ys[j] >= out_y.back(), "invalid_cdf", "candidate breakpoints must be sorted");
      require(p >= out_p.back(), "invalid_cdf", "candidate levels must be nondecreasing");
      if (ys[j] == out_y.back()) {
        // Same location: the later (higher) level wins.
        out_p.back() = p;
        continue;
      }
      if (p == out_p.back()) continue;
    }
    out_y.push_back(ys[j]);
    out_p.push_back(p);
  }
  return StepCdf(std::move(out_y), std::move(out_p));
}

StepCdf StepCdf::point_mass(double y) { return StepCdf({y}, {1.0}); }

double StepCdf::operator()(double y) const noexcept {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
  if (it == breakpoints_.begin()) return 0.0;
  return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepCdf::left_limit(double y) const noexcept {
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), y);
  if (it == breakpoints_.begin()) return 0.0;
  return levels_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepCdf::quantile(double v) const noexcept {
  auto it = std::lower_bound(levels_.begin(), levels_.end(), v);
  // v <= 1 always finds a level because the last level is 1.
  if (it == levels_.end()) return std::numeric_limits<double>::infinity();
  return breakpoints_[static_cast<std::size_t>(it - levels_.begin())];
}

double StepCdf::quantile_strict(double v) const noexcept {
  auto it = std::upper_bound(levels_.begin(), levels_.end(), v);
  if (it == levels_.end()) return std::numeric_limits<double>::infinity();
  return breakpoints_[static_cast<std::size_t>(it - levels_.begin())];
}

double var_of_cdf(const StepCdf& cdf, TailLevel level) {
  return cdf.quantile_strict(1.0 - level.value());
}

double cvar_of_cdf(const StepCdf& cdf, TailLevel level) {
  const double alpha = level.value();
  const double threshold = 1.0 - alpha;
  const auto ys = cdf.breakpoints();
  const auto ps = cdf.levels();
  // Q(v) = y_j on (p_{j-1}, p_j]; integrate over (1 - a, 1].
  double integral = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    const double width = ps[j] - std::max(prev, threshold);
    if (width > 0.0) integral += ys[j] * width;
    prev = ps[j];
  }
  return integral / alpha;
}

double mean_of_cdf(const StepCdf& cdf) {
  const auto ys = cdf.breakpoints();
  const auto ps = cdf.levels();
  double mean = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    mean += ys[j] * (ps[j] - prev);
    prev = ps[j];
  }
  return mean;
}

double cvar_inf_form(const SampleBatch& batch, TailLevel level) {
  const auto z = batch.sorted();
  const std::size_t n = z.size();
  const double scale = 1.0 / (static_cast<double>(n) * level.value());
  // suffix[k] = sum_{i >= k} z_i, so sum_i (z_i - z_k)^+ = suffix[k+1] - (n-k-1) z_k.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + z[k];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double w = z[k];
    const double excess = suffix[k + 1] - static_cast<double>(n - k - 1) * w;
    best = std::min(best, w + scale * excess);
  }
  return best;
}

double cvar_sorted_form(const SampleBatch& batch, TailLevel level) {
  const auto z = batch.sorted();
  const std::size_t n = z.size();
  const double alpha = level.value();
  const double nd = static_cast<double>(n);
  double correction = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double weight = static_cast<double>(i) / nd - (1.0 - alpha);
    if (weight > 0.0) correction += (z[i] - z[i - 1]) * weight;
  }
  return z[n - 1] - correction / alpha;
}

}  // namespace cvarbound
