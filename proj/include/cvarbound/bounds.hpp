#pragma once

// Deterministic CVaR sandwiches for X built from a related variable Y.
//
// Uniform discrepancy: sup(F_Y - F_X) <= eps gives an upper bound on
// CVaR_a(X); sup(F_X - F_Y) <= eps gives a lower bound. Both are available as
// closed forms in CVaR_Y at shifted levels and as explicit bounding CDFs
// (F_Y^U, F_Y^L) whose CVaR can be evaluated exactly. Non-uniform discrepancy
// is handled by a monotone envelope g (or a density discrepancy h).

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cvarbound/riskcore.hpp"

namespace cvarbound {

// Essential supports of X and Y; infinite values mean "unbounded on that side".
struct SupportBounds {
  double a_x = -std::numeric_limits<double>::infinity();
  double b_x = std::numeric_limits<double>::infinity();
  double a_y = -std::numeric_limits<double>::infinity();
  double b_y = std::numeric_limits<double>::infinity();

  double a_min() const noexcept;
  double b_min() const noexcept;
  double b_max() const noexcept;

  // a <= b on each variable where both ends are finite, no NaNs.
  void validate() const;
};

struct Knot {
  double x;
  double value;
};

// Discrepancy envelope between two CDFs (g) or two densities (h). Knots are
// interpreted by linear interpolation; left of the first knot the function is
// 0, right of the last knot it is held constant (g) or 0 (h).
class Envelope {
 public:
  enum class Kind { Uniform, PiecewiseLinearG, PiecewiseLinear, DensityH };

  static Envelope uniform(double eps);
  // Knot values must be nonnegative and nondecreasing; x nondecreasing
  // (repeated x expresses a jump).
  static Envelope piecewise_linear_g(std::vector<Knot> knots);
  // Any nonnegative shape; accepted only by general_g_bounds.
  static Envelope piecewise_linear(std::vector<Knot> knots);
  // Knot values nonnegative, first and last values 0 (compact support).
  static Envelope density_h(std::vector<Knot> knots);

  Kind kind() const noexcept { return kind_; }
  double eps() const noexcept { return eps_; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }

  // Right-continuous value at x.
  double operator()(double x) const noexcept;
  // lim_{t -> x-} value(t).
  double left_limit(double x) const noexcept;
  // Largest value attained anywhere.
  double sup() const noexcept;

 private:
  Envelope(Kind kind, double eps, std::vector<Knot> knots);

  Kind kind_;
  double eps_;
  std::vector<Knot> knots_;
};

enum class BoundCase { UMain, UDegenerate, LMain, LDegenerate, General };

const char* to_string(BoundCase c) noexcept;

// A certified CVaR interval. Each side is optional; an absent side carries a
// machine-readable reason. Sides hold separately with probability `guarantee`
// (1 for deterministic bounds); no joint claim is made.
struct BoundReport {
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<BoundCase> lower_case;
  std::optional<BoundCase> upper_case;
  std::optional<std::string> lower_absent_reason;
  std::optional<std::string> upper_absent_reason;
  double guarantee = 1.0;

  struct Inputs {
    double alpha = 0.0;
    double eps = 0.0;
    SupportBounds supports;
  } inputs;
};

// CVaR of Y as a function of the tail level. Must be safe to call
// concurrently when bounds are evaluated from multiple threads.
using CvarFunction = std::function<double(TailLevel)>;

// Upper bound on CVaR_a(X) given sup(F_Y - F_X) <= eps.
BoundReport uniform_upper_bound(const CvarFunction& cvar_y, TailLevel level, double eps,
                                const SupportBounds& supports);

// Lower bound on CVaR_a(X) given sup(F_X - F_Y) <= eps.
BoundReport uniform_lower_bound(const CvarFunction& cvar_y, double mean_y, TailLevel level,
                                double eps, const SupportBounds& supports);

// F_Y^U: pointwise below every admissible F_X (eps in [0, 1)).
StepCdf construct_upper_cdf(const StepCdf& f_y, double eps, const SupportBounds& supports);

// F_Y^L: pointwise above every admissible F_X.
StepCdf construct_lower_cdf(const StepCdf& f_y, double eps, const SupportBounds& supports);

// Step CDF lying pointwise above min(1, F_Y + g), evaluated on the union of
// f_y breakpoints, g knots and `grid_points` uniform points spanning
// [min breakpoint - 1, max breakpoint + 1]. Its CVaR lower-bounds CVaR_a(X)
// whenever F_X <= F_Y + g.
StepCdf g_envelope_lower_cdf(const StepCdf& f_y, const Envelope& g, int grid_points = 1024);

// g(z) = integral_{-inf}^{z} h, sampled exactly at the h knots plus
// `subdivisions` interior points per knot interval.
Envelope density_h_to_g(const Envelope& h, int subdivisions = 64);

// Integral bounds for an arbitrary nonnegative g with |F_X - F_Y| <= g.
// Trapezoidal quadrature in tau with `nodes` uniform nodes plus the
// integrand's break levels; a side whose integrand is infinite somewhere on
// (1 - a, 1] is reported absent.
BoundReport general_g_bounds(const StepCdf& f_y, const Envelope& g, TailLevel level,
                             int nodes = 10001);

}  // namespace cvarbound
