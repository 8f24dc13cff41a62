// Acceptance checks, one PASS/FAIL line per criterion. Exit status is
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvarbound/bounds.hpp"
#include "cvarbound/concentration.hpp"
#include "cvarbound/distributions.hpp"
#include "cvarbound/experiments.hpp"
#include "cvarbound/riskcore.hpp"
#include "cvarbound/rng.hpp"
#include "support.hpp"

using namespace cvarbound;
namespace ex = cvarbound::experiments;

namespace {

// Tolerances and limits.
constexpr double kPathTol = 1e-9;
constexpr double kPathSeconds = 5.0;
constexpr double kCoincidenceTol = 1e-9;
constexpr double kLongRunSeconds = 60.0;
constexpr double kMaxViolationRate = 0.071;
constexpr double kConvergenceFraction = 0.02;
constexpr double kMinContainment = 0.90;
constexpr double kConstructionTol = 1e-9;
constexpr double kDominanceTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome estimator_paths() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> un(1, 500);
  std::uniform_real_distribution<double> uv(-100.0, 100.0);
  std::uniform_real_distribution<double> ua(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> v(static_cast<std::size_t>(un(rng)));
    for (auto& x : v) x = uv(rng);
    if (rep % 4 == 0) v.insert(v.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2));
    const SampleBatch b(std::move(v));
    const TailLevel t(1.0 - ua(rng));
    const double inf = cvar_inf_form(b, t);
    const double srt = cvar_sorted_form(b, t);
    const double cdf = cvar_of_cdf(ecdf(b), t);
    worst = std::max({worst, std::fabs(inf - srt), std::fabs(inf - cdf), std::fabs(srt - cdf)});
  }
  const double secs = seconds_since(t0);
  return {worst <= kPathTol && secs < kPathSeconds, fmt("max disagreement %.3g, %.2f s", worst, secs)};
}

Outcome coincidence() {
  const auto t0 = Clock::now();
  auto c = ex::default_config(ex::ExperimentKind::Coincidence);
  c.b_truncation = 50.0;  // explicit b for the Laplace upper side
  const auto rows = ex::run_coincidence(c);
  double worst = 0.0;
  std::size_t upper = 0, lower = 0, missing = 0;
  for (const auto& r : rows) {
    const bool main_lower = c.alpha + dkw_epsilon(c.delta, r.n) < 1.0;
    const bool required = r.bound_kind == "upper_pair" || main_lower;
    if (!required) continue;
    if (!r.gap) {
      ++missing;
      continue;
    }
    worst = std::max(worst, *r.gap);
    ++(r.bound_kind == "upper_pair" ? upper : lower);
  }
  const double secs = seconds_since(t0);
  return {missing == 0 && worst <= kCoincidenceTol && secs < kLongRunSeconds,
          fmt("max gap %.3g over %zu upper / %zu lower pairs, %zu missing, %.1f s", worst, upper, lower, missing,
              secs)};
}

Outcome coverage() {
  const auto t0 = Clock::now();
  const auto c = ex::default_config(ex::ExperimentKind::Coverage);
  const auto s = ex::summarize_coverage(ex::run_coverage(c));
  const double secs = seconds_since(t0);
  if (s.size() != 1) return {false, "unexpected summary shape"};
  const bool ok = s[0].runs == 1000 && s[0].lower_violation_rate <= kMaxViolationRate &&
                  s[0].upper_violation_rate <= kMaxViolationRate && secs < kLongRunSeconds;
  return {ok, fmt("violation rate lower %.3f upper %.3f over %zu runs, %.1f s", s[0].lower_violation_rate,
                  s[0].upper_violation_rate, s[0].runs, secs)};
}

Outcome convergence() {
  const dist::DistributionSpec spec = dist::TruncatedNormal{0.0, 0.09, -1.0, 1.0};
  const TailLevel level(0.2);
  const double truth = dist::true_cvar(spec, level, 1000000);
  const SupportBounds s{-1.0, 1.0};
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double lo = 0, hi = 0;
  std::string widths;
  for (std::size_t n : {100u, 1000u, 10000u, 100000u}) {
    const auto batch = dist::sample(spec, n, derive_seed(4242, n));
    const auto r = ecdf_cvar_bounds(batch, level, 0.05, s);
    const double w = *r.upper - *r.lower;
    monotone = monotone && w < prev;
    prev = w;
    lo = *r.lower;
    hi = *r.upper;
    widths += fmt("%s%.4g", widths.empty() ? "" : ", ", w);
  }
  const double tol = kConvergenceFraction * 2.0;
  const bool close = std::fabs(lo - truth) <= tol && std::fabs(hi - truth) <= tol;
  return {monotone && close, fmt("widths [%s]; at n=1e5 lower %+.4f upper %+.4f from truth (tol %.2f)",
                                 widths.c_str(), lo - truth, hi - truth, tol)};
}

Outcome surrogate() {
  auto c = ex::default_config(ex::ExperimentKind::SurrogateConvergence);
  c.n_grid = {100, 1000, 10000};
  c.repetitions = 100;
  c.true_cvar_nodes = 1000000;
  const auto j = ex::summarize(c, ex::run_surrogate_convergence(c));
  const double rate = j["containment_rate"].get<double>();
  const double w100 = j["mean_width_by_n"]["100"].get<double>();
  const double w1e4 = j["mean_width_by_n"]["10000"].get<double>();
  return {rate >= kMinContainment && w1e4 < w100,
          fmt("containment %.3f, mean width %.4f (n=100) -> %.4f (n=10000)", rate, w100, w1e4)};
}

Outcome eps_to_zero() {
  const TailLevel level(0.2);
  bool ok = true;
  std::string detail;

  // Analytic Y with quadrature CVaR.
  const dist::DistributionSpec y = dist::TruncatedNormal{0.0, 0.09, -1.0, 1.0};
  const CvarFunction cvar_y = [&](TailLevel t) { return dist::true_cvar(y, t, 10000); };
  const double my = dist::mean(y);
  const SupportBounds s{-1.0, 1.0, -1.0, 1.0};
  const double c = cvar_y(level);
  ok = ok && *uniform_upper_bound(cvar_y, level, 0.0, s).upper == c &&
       *uniform_lower_bound(cvar_y, my, level, 0.0, s).lower == c;
  double pu = std::numeric_limits<double>::infinity(), pl = pu;
  for (double eps : {0.1, 0.05, 0.01, 0.001}) {
    const double gu = *uniform_upper_bound(cvar_y, level, eps, s).upper - c;
    const double gl = c - *uniform_lower_bound(cvar_y, my, level, eps, s).lower;
    ok = ok && gu >= 0 && gl >= 0 && gu < pu && gl < pl;
    detail += fmt("%seps=%g: +%.4g/-%.4g", detail.empty() ? "" : ", ", eps, gu, gl);
    pu = gu;
    pl = gl;
  }

  // Step-CDF Y, exact CVaR.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(5000);
  for (auto& x : v) x = nd(rng);
  const StepCdf f = ecdf(SampleBatch(v));
  const CvarFunction cvar_f = [&](TailLevel t) { return cvar_of_cdf(f, t); };
  const SupportBounds sf{f.min_support(), f.max_support(), f.min_support(), f.max_support()};
  const double cf = cvar_f(level);
  ok = ok && *uniform_upper_bound(cvar_f, level, 0.0, sf).upper == cf &&
       *uniform_lower_bound(cvar_f, mean_of_cdf(f), level, 0.0, sf).lower == cf;
  return {ok, "exact at eps=0; gaps " + detail};
}

Outcome constructions() {
  std::mt19937_64 rng(777);
  int instances = 0, failures = 0;
  auto well_formed = [](const StepCdf& g, const SupportBounds& s) {
    const auto x = g.breakpoints();
    const auto p = g.levels();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i]) || p[i] <= 0.0 || p[i] > 1.0) return false;
      if (i && (x[i] <= x[i - 1] || p[i] < p[i - 1])) return false;
    }
    return p.back() == 1.0 && x.front() >= s.a_min() && x.back() <= s.b_max();
  };
  for (int rep = 0; rep < 500; ++rep) {
    const StepCdf fx = testsupport::random_step_cdf(rng, 1 + rep % 25, -5.0, 5.0);
    const StepCdf fy = testsupport::random_step_cdf(rng, 1 + (rep * 3) % 25, -5.0, 5.0);
    const SupportBounds s{fx.min_support(), fx.max_support(), fy.min_support(), fy.max_support()};
    const CvarFunction cvar_y = [&](TailLevel t) { return cvar_of_cdf(fy, t); };
    const double eps_u = testsupport::sup_excess(fy, fx);
    const double eps_l = testsupport::sup_excess(fx, fy);
    bool ok = true;
    if (eps_u < 1.0) {
      const StepCdf u = construct_upper_cdf(fy, eps_u, s);
      ok = ok && well_formed(u, s) && testsupport::sup_excess(u, fx) <= kDominanceTol;
      for (double a : {0.05, 0.2, 0.5, 1.0}) {
        const TailLevel t(a);
        ok = ok && std::fabs(*uniform_upper_bound(cvar_y, t, eps_u, s).upper - cvar_of_cdf(u, t)) <= kConstructionTol;
      }
    }
    const StepCdf l = construct_lower_cdf(fy, eps_l, s);
    ok = ok && well_formed(l, s) && testsupport::sup_excess(fx, l) <= kDominanceTol;
    for (double a : {0.05, 0.2, 0.5, 1.0}) {
      const TailLevel t(a);
      ok = ok && *uniform_lower_bound(cvar_y, mean_of_cdf(fy), t, eps_l, s).lower <= cvar_of_cdf(l, t) + kConstructionTol;
    }
    ++instances;
    failures += !ok;
  }
  return {failures == 0, fmt("%d instances, %d failing", instances, failures)};
}

Outcome timing() {
  const auto c = ex::default_config(ex::ExperimentKind::Timing);
  const auto rows = ex::run_timing(c);
  bool ok = !rows.empty();
  std::vector<double> sample_ratio, e2e_ratio;
  for (const auto& r : rows) {
    ok = ok && r.nanoseconds && *r.nanoseconds > 0 && r.ratio && *r.ratio > 0.0;
    if (r.bound_kind == "sample_target") sample_ratio.push_back(*r.ratio);
    if (r.bound_kind == "end_to_end_target") e2e_ratio.push_back(*r.ratio);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : v[v.size() / 2];
  };
  return {ok, fmt("measured speedup sampling %.2fx, end-to-end %.2fx (informational)", median(sample_ratio),
                  median(e2e_ratio))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"estimator paths agree", estimator_paths},
      {"order-statistic and ECDF bounds coincide", coincidence},
      {"ECDF bound coverage", coverage},
      {"ECDF bounds converge", convergence},
      {"surrogate sandwich contains the mixture CVaR", surrogate},
      {"uniform bounds exact at eps=0 and converge", eps_to_zero},
      {"constructed CDF properties", constructions},
      {"timing run emits positive ratios", timing},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
