#include "cvarbound/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cvarbound/error.hpp"

namespace cvarbound {
namespace {

void require_delta_open(double delta) {
  require(delta > 0.0 && delta < 1.0, "invalid_delta",
          "delta must lie in (0, 1), got " + std::to_string(delta));
}

void require_delta_order_stat(double delta) {
  require(delta > 0.0 && delta <= 0.5, "invalid_delta",
          "order-statistic bounds need delta in (0, 0.5], got " + std::to_string(delta));
}

enum class LowerSplit { Strict, Inclusive };

// The uniform sandwich evaluated on an empirical CDF. `lower_split` picks the
// main-case condition a + eps < 1 (Strict) or a + eps <= 1 (Inclusive).
BoundReport empirical_sandwich(const StepCdf& f, TailLevel level, double eps, double a, double b,
                               LowerSplit lower_split, double guarantee) {
  BoundReport r;
  r.guarantee = guarantee;
  r.inputs.alpha = level.value();
  r.inputs.eps = eps;
  const double alpha = level.value();
  const double w = eps / alpha;

  if (std::isfinite(b)) {
    if (alpha > eps) {
      r.upper_case = BoundCase::UMain;
      r.upper = (1.0 - w) * cvar_of_cdf(f, TailLevel(alpha - eps)) + w * b;
    } else {
      r.upper_case = BoundCase::UDegenerate;
      r.upper = b;
    }
  } else {
    r.upper_absent_reason = "missing_support";
  }

  const bool main_lower = lower_split == LowerSplit::Strict ? alpha + eps < 1.0 : alpha + eps <= 1.0;
  if (main_lower) {
    r.lower_case = BoundCase::LMain;
    r.lower = (1.0 + w) * cvar_of_cdf(f, TailLevel(alpha + eps)) - w * cvar_of_cdf(f, TailLevel(eps));
  } else if (std::isfinite(a)) {
    r.lower_case = BoundCase::LDegenerate;
    r.lower = ((alpha + eps - 1.0) * a + mean_of_cdf(f) - eps * cvar_of_cdf(f, TailLevel(eps))) / alpha;
  } else {
    r.lower_case = BoundCase::LDegenerate;
    r.lower_absent_reason = "missing_support";
  }
  return r;
}

}  // namespace

double dkw_epsilon(double delta, std::size_t n) {
  require_delta_open(delta);
  require(n >= 1, "invalid_n", "sample count must be at least 1");
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

DiscrepancyBudget::DiscrepancyBudget(double delta, std::size_t n, double eps_model)
    : delta_(delta), n_(n), eps_model_(eps_model) {
  require_delta_open(delta);
  require(n >= 1, "invalid_n", "sample count must be at least 1");
  require(eps_model >= 0.0 && eps_model <= 1.0, "invalid_eps",
          "model discrepancy must lie in [0, 1], got " + std::to_string(eps_model));
}

double DiscrepancyBudget::eta() const { return dkw_epsilon(delta_, n_); }

double DiscrepancyBudget::eps_prime() const { return std::min(eps_model_ + eta(), 1.0); }

StepCdf ecdf(const SampleBatch& batch) {
  const auto z = batch.sorted();
  const double n = static_cast<double>(z.size());
  std::vector<double> ys;
  std::vector<double> ps;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double level = static_cast<double>(i + 1) / n;
    if (!ys.empty() && ys.back() == z[i]) {
      ps.back() = level;
    } else {
      ys.push_back(z[i]);
      ps.push_back(level);
    }
  }
  return StepCdf(std::move(ys), std::move(ps));
}

BoundReport ecdf_cvar_bounds(const SampleBatch& batch, TailLevel level, double delta,
                             const SupportBounds& support) {
  support.validate();
  // A radius of 1 or more says nothing about F_X; clamp so CVaR_eps stays defined.
  const double eps = std::min(dkw_epsilon(delta, batch.size()), 1.0);
  if (std::isfinite(support.b_x)) {
    require(support.b_x >= batch.max(), "invalid_support", "sample exceeds the declared upper support b");
  }
  if (std::isfinite(support.a_x)) {
    require(support.a_x <= batch.min(), "invalid_support", "sample is below the declared lower support a");
  }
  BoundReport r = empirical_sandwich(ecdf(batch), level, eps, support.a_x, support.b_x,
                                     LowerSplit::Strict, 1.0 - delta);
  r.inputs.supports = support;
  return r;
}

BoundReport surrogate_cvar_bounds(const SampleBatch& batch_y, TailLevel level,
                                  const DiscrepancyBudget& budget, const SupportBounds& supports) {
  supports.validate();
  require(budget.n() == batch_y.size(), "invalid_budget", "budget n does not match the surrogate sample size");
  if (std::isfinite(supports.b_y)) {
    require(supports.b_y >= batch_y.max(), "invalid_support", "surrogate sample exceeds b_y");
  }
  if (std::isfinite(supports.a_y)) {
    require(supports.a_y <= batch_y.min(), "invalid_support", "surrogate sample is below a_y");
  }
  // With eps_model = 0, X = Y and the surrogate bound is the ECDF bound; use
  // the same evaluation path so the two agree bit for bit.
  BoundReport r = empirical_sandwich(ecdf(batch_y), level, budget.eps_prime(), supports.a_min(),
                                     supports.b_max(),
                                     budget.eps_model() == 0.0 ? LowerSplit::Strict : LowerSplit::Inclusive,
                                     1.0 - budget.delta());
  r.inputs.supports = supports;
  return r;
}

std::pair<double, double> brown_deviation_bounds(TailLevel level, double delta, std::size_t n,
                                                 double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "invalid_support",
          "Brown bounds need finite a < b");
  require(delta > 0.0 && delta <= 1.0, "invalid_delta", "delta must lie in (0, 1]");
  require(n >= 1, "invalid_n", "sample count must be at least 1");
  const double alpha = level.value();
  const double nd = static_cast<double>(n);
  const double range = b - a;
  const double upper = range * std::sqrt(5.0 * std::log(3.0 / delta) / (alpha * nd));
  const double lower = range / alpha * std::sqrt(std::log(1.0 / delta) / (2.0 * nd));
  return {upper, lower};
}

double order_stat_upper_bound(const SampleBatch& batch, TailLevel level, double delta, double b) {
  require_delta_order_stat(delta);
  require(std::isfinite(b) && b >= batch.max(), "invalid_support", "b must be finite and at least the sample max");
  const auto z = batch.sorted();
  const std::size_t n = z.size();
  const double nd = static_cast<double>(n);
  const double alpha = level.value();
  const double eta = std::sqrt(std::log(1.0 / delta) / (2.0 * nd));
  double correction = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double weight = static_cast<double>(i) / nd - eta - (1.0 - alpha);
    if (weight <= 0.0) continue;
    const double next = (i == n) ? b : z[i];
    correction += (next - z[i - 1]) * weight;
  }
  return b - correction / alpha;
}

double order_stat_lower_bound(const SampleBatch& batch, TailLevel level, double delta, double a) {
  require_delta_order_stat(delta);
  require(!std::isnan(a) && a <= batch.min(), "invalid_support", "a must not exceed the sample min");
  const auto z = batch.sorted();
  const std::size_t n = z.size();
  const double nd = static_cast<double>(n);
  const double alpha = level.value();
  const double eta = std::sqrt(std::log(1.0 / delta) / (2.0 * nd));
  double correction = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double weight = std::min(1.0, static_cast<double>(i) / nd + eta) - (1.0 - alpha);
    if (weight <= 0.0) continue;
    const double prev = (i == 0) ? a : z[i - 1];
    correction += (z[i] - prev) * weight;
  }
  return z[n - 1] - correction / alpha;
}

}  // namespace cvarbound
