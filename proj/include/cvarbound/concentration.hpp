#pragma once

// Sample-driven CVaR confidence bounds.
//
// The ECDF of n i.i.d. draws is within eta = sqrt(ln(1/delta) / (2n)) of the
// true CDF on each side with probability at least 1 - delta (one-sided DKW),
// so the deterministic sandwiches in bounds.hpp applied to the ECDF become
// one-sided (1 - delta) confidence bounds. The order-statistic forms are the
// same bounds written as reweighted sums of sorted-sample gaps.

#include <cstddef>
#include <utility>

#include "cvarbound/bounds.hpp"
#include "cvarbound/riskcore.hpp"

namespace cvarbound {

double dkw_epsilon(double delta, std::size_t n);

// Calibration record for bounding X from n samples of a surrogate Y whose CDF
// is within eps_model of F_X.
class DiscrepancyBudget {
 public:
  DiscrepancyBudget(double delta, std::size_t n, double eps_model);

  double delta() const noexcept { return delta_; }
  std::size_t n() const noexcept { return n_; }
  double eps_model() const noexcept { return eps_model_; }
  double eta() const;        // sqrt(ln(1/delta) / (2n))
  double eps_prime() const;  // min(eps_model + eta, 1)

 private:
  double delta_;
  std::size_t n_;
  double eps_model_;
};

StepCdf ecdf(const SampleBatch& batch);

// Bounds on CVaR_a(X) from X's own sample. Uses `support.a_x` (lower side,
// needed only in the degenerate case) and `support.b_x` (upper side). A side
// whose support bound is missing is reported absent with reason
// "missing_support".
BoundReport ecdf_cvar_bounds(const SampleBatch& batch, TailLevel level, double delta,
                             const SupportBounds& support);

// Bounds on CVaR_a(X) from samples of Y, using eps' = budget.eps_prime().
BoundReport surrogate_cvar_bounds(const SampleBatch& batch_y, TailLevel level,
                                  const DiscrepancyBudget& budget, const SupportBounds& supports);

// One-sided deviation radii (r_upper, r_lower) for the plain estimator:
// CVaR - C_hat > r_upper and CVaR - C_hat < -r_lower each have probability
// at most delta. Requires a < b.
std::pair<double, double> brown_deviation_bounds(TailLevel level, double delta, std::size_t n,
                                                 double a, double b);

// Z_{n+1} - (1/a) sum_{i=1}^{n} (Z_{i+1} - Z_i) (i/n - eta - (1 - a))^+, Z_{n+1} = b.
double order_stat_upper_bound(const SampleBatch& batch, TailLevel level, double delta, double b);

// Z_n - (1/a) sum_{i=0}^{n-1} (Z_{i+1} - Z_i) (min(1, i/n + eta) - (1 - a))^+, Z_0 = a.
// `a` may be -inf when the Z_0 term carries zero weight.
double order_stat_lower_bound(const SampleBatch& batch, TailLevel level, double delta, double a);

}  // namespace cvarbound
