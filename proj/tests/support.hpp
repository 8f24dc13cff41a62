#pragma once

// Shared helpers for randomized tests.

#include <algorithm>
#include <random>
#include <vector>

#include "cvarbound/riskcore.hpp"

namespace testsupport {

// Random step CDF with up to k atoms in [lo, hi].
inline cvarbound::StepCdf random_step_cdf(std::mt19937_64& rng, int k, double lo = -10.0, double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> ys(static_cast<std::size_t>(std::max(k, 1)));
  for (auto& y : ys) y = u(rng);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<double> w(ys.size());
  double total = 0.0;
  for (auto& x : w) total += (x = 0.05 + u01(rng));
  std::vector<double> ps(ys.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = std::min(1.0, acc += w[i] / total);
  ps.back() = 1.0;
  return cvarbound::StepCdf(ys, ps);
}

// Union of both breakpoint sets; both CDFs are constant between consecutive
// points, so sup-type checks over the reals reduce to these points.
inline std::vector<double> merged_points(const cvarbound::StepCdf& f, const cvarbound::StepCdf& g) {
  std::vector<double> t(f.breakpoints().begin(), f.breakpoints().end());
  t.insert(t.end(), g.breakpoints().begin(), g.breakpoints().end());
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

// sup_z (F(z) - G(z)), never below 0.
inline double sup_excess(const cvarbound::StepCdf& f, const cvarbound::StepCdf& g) {
  double worst = 0.0;
  for (double z : merged_points(f, g)) worst = std::max(worst, f(z) - g(z));
  return worst;
}

}  // namespace testsupport
