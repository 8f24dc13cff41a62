#include "cvarbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvarbound/error.hpp"

namespace cvarbound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_eps(double eps, bool allow_one) {
  const bool ok = allow_one ? (eps >= 0.0 && eps <= 1.0) : (eps >= 0.0 && eps < 1.0);
  require(ok, "invalid_eps",
          std::string("discrepancy eps must lie in ") + (allow_one ? "[0, 1]" : "[0, 1)") +
              ", got " + std::to_string(eps));
}

void require_finite(double v, const char* name) {
  require(std::isfinite(v), "missing_support", std::string(name) + " must be finite for this bound");
}

BoundReport make_report(TailLevel level, double eps, const SupportBounds& supports) {
  BoundReport r;
  r.guarantee = 1.0;
  r.inputs.alpha = level.value();
  r.inputs.eps = eps;
  r.inputs.supports = supports;
  return r;
}

// Piecewise-linear interpolation shared by the g and h envelopes.
double interpolate_right(const std::vector<Knot>& k, double x) {
  if (k.empty() || x < k.front().x) return 0.0;
  auto it = std::upper_bound(k.begin(), k.end(), x, [](double v, const Knot& kn) { return v < kn.x; });
  const auto j = static_cast<std::size_t>(it - k.begin()) - 1;
  if (j + 1 == k.size()) return k.back().value;
  const Knot& a = k[j];
  const Knot& b = k[j + 1];
  return a.value + (b.value - a.value) * (x - a.x) / (b.x - a.x);
}

double interpolate_left(const std::vector<Knot>& k, double x) {
  if (k.empty() || x <= k.front().x) return 0.0;
  auto it = std::lower_bound(k.begin(), k.end(), x, [](const Knot& kn, double v) { return kn.x < v; });
  const auto j = static_cast<std::size_t>(it - k.begin()) - 1;
  if (j + 1 == k.size()) return k.back().value;
  const Knot& a = k[j];
  const Knot& b = k[j + 1];
  return a.value + (b.value - a.value) * (x - a.x) / (b.x - a.x);
}

void validate_knots(const std::vector<Knot>& knots) {
  require(!knots.empty(), "invalid_envelope", "envelope needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(std::isfinite(knots[i].x) && std::isfinite(knots[i].value), "invalid_envelope",
            "envelope knots must be finite");
    require(knots[i].value >= 0.0, "invalid_envelope", "envelope values must be nonnegative");
    if (i > 0) require(knots[i].x >= knots[i - 1].x, "invalid_envelope", "envelope knots must be sorted by x");
  }
}

void check_cdf_within(const StepCdf& f_y, const SupportBounds& s) {
  if (std::isfinite(s.a_y)) {
    require(f_y.min_support() >= s.a_y, "invalid_support", "F_Y puts mass below the declared a_y");
  }
  if (std::isfinite(s.b_y)) {
    require(f_y.max_support() <= s.b_y, "invalid_support", "F_Y puts mass above the declared b_y");
  }
}

template <class LevelFn>
StepCdf build_from_points(std::vector<double> ys, LevelFn level_at) {
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<double> ps(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) ps[i] = level_at(ys[i]);
  return StepCdf::from_candidates(ys, ps);
}

// H(z) = F_Y(z) + sign * g(z) on the merged breakpoint grid. Within each
// cell [t_k, t_{k+1}) H is linear; `start` is H(t_k), `end` the left limit at
// t_{k+1}. The final cell [t_m, inf) is constant.
class ShiftedCdf {
 public:
  ShiftedCdf(const StepCdf& f, const Envelope& g, double sign) {
    std::vector<double> t(f.breakpoints().begin(), f.breakpoints().end());
    for (const Knot& k : g.knots()) t.push_back(k.x);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    grid_ = std::move(t);
    below_ = sign * g.left_limit(grid_.front());
    const std::size_t m = grid_.size();
    start_.resize(m);
    end_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      start_[k] = f(grid_[k]) + sign * g(grid_[k]);
      end_[k] = (k + 1 < m) ? f(grid_[k]) + sign * g.left_limit(grid_[k + 1]) : start_[k];
    }
    max_start_.resize(m);
    max_end_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      max_start_[k] = k ? std::max(max_start_[k - 1], start_[k]) : start_[k];
      max_end_[k] = k ? std::max(max_end_[k - 1], end_[k]) : end_[k];
    }
  }

  // inf{z : H(z) >= tau} (strict = false) or inf{z : H(z) > tau}.
  double quantile(double tau, bool strict) const {
    if (strict ? below_ > tau : below_ >= tau) return -kInf;
    const std::size_t m = grid_.size();
    auto reaches = [&](std::size_t k) {
      return (strict ? max_start_[k] > tau : max_start_[k] >= tau) || max_end_[k] > tau;
    };
    std::size_t lo = 0, hi = m;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (reaches(mid)) hi = mid; else lo = mid + 1;
    }
    for (std::size_t k = lo; k < m; ++k) {
      const double h0 = start_[k];
      const double h1 = end_[k];
      if (strict ? h0 > tau : h0 >= tau) return grid_[k];
      if (k + 1 < m && h1 > tau && h1 > h0) {
        const double z = grid_[k] + (tau - h0) / (h1 - h0) * (grid_[k + 1] - grid_[k]);
        return std::min(z, grid_[k + 1]);
      }
    }
    return kInf;
  }

  // Levels at which the quantile function can kink or jump.
  std::vector<double> break_levels() const {
    std::vector<double> out{below_};
    out.insert(out.end(), start_.begin(), start_.end());
    out.insert(out.end(), end_.begin(), end_.end());
    return out;
  }

 private:
  std::vector<double> grid_;
  double below_ = 0.0;
  std::vector<double> start_, end_, max_start_, max_end_;
};

std::optional<double> integrate_quantile(const ShiftedCdf& h, double alpha, int nodes) {
  const double lo = 1.0 - alpha;
  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(nodes) + 64);
  for (int i = 0; i < nodes; ++i) {
    taus.push_back(lo + alpha * static_cast<double>(i) / static_cast<double>(nodes - 1));
  }
  taus.back() = 1.0;
  for (double b : h.break_levels()) {
    if (b > lo && b < 1.0) taus.push_back(b);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < taus.size(); ++j) {
    const double left = h.quantile(taus[j], /*strict=*/true);
    const double right = h.quantile(taus[j + 1], /*strict=*/false);
    if (!std::isfinite(left) || !std::isfinite(right)) return std::nullopt;
    integral += 0.5 * (left + right) * (taus[j + 1] - taus[j]);
  }
  return integral / alpha;
}

}  // namespace

double SupportBounds::a_min() const noexcept { return std::min(a_x, a_y); }
double SupportBounds::b_min() const noexcept { return std::min(b_x, b_y); }
double SupportBounds::b_max() const noexcept { return std::max(b_x, b_y); }

void SupportBounds::validate() const {
  for (double v : {a_x, b_x, a_y, b_y}) {
    require(!std::isnan(v), "invalid_support", "support bounds must not be NaN");
  }
  require(a_x != kInf && a_y != kInf, "invalid_support", "lower support bound cannot be +inf");
  require(b_x != -kInf && b_y != -kInf, "invalid_support", "upper support bound cannot be -inf");
  require(a_x <= b_x, "invalid_support", "a_x must not exceed b_x");
  require(a_y <= b_y, "invalid_support", "a_y must not exceed b_y");
}

Envelope::Envelope(Kind kind, double eps, std::vector<Knot> knots)
    : kind_(kind), eps_(eps), knots_(std::move(knots)) {}

Envelope Envelope::uniform(double eps) {
  require_eps(eps, /*allow_one=*/true);
  return Envelope(Kind::Uniform, eps, {});
}

Envelope Envelope::piecewise_linear_g(std::vector<Knot> knots) {
  validate_knots(knots);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(knots[i].value >= knots[i - 1].value, "invalid_envelope", "g must be nondecreasing");
  }
  return Envelope(Kind::PiecewiseLinearG, 0.0, std::move(knots));
}

Envelope Envelope::piecewise_linear(std::vector<Knot> knots) {
  validate_knots(knots);
  return Envelope(Kind::PiecewiseLinear, 0.0, std::move(knots));
}

Envelope Envelope::density_h(std::vector<Knot> knots) {
  validate_knots(knots);
  require(knots.front().value == 0.0 && knots.back().value == 0.0, "invalid_envelope",
          "density discrepancy h must vanish at its first and last knot");
  return Envelope(Kind::DensityH, 0.0, std::move(knots));
}

double Envelope::operator()(double x) const noexcept {
  if (kind_ == Kind::Uniform) return eps_;
  return interpolate_right(knots_, x);
}

double Envelope::left_limit(double x) const noexcept {
  if (kind_ == Kind::Uniform) return eps_;
  return interpolate_left(knots_, x);
}

double Envelope::sup() const noexcept {
  if (kind_ == Kind::Uniform) return eps_;
  double s = 0.0;
  for (const Knot& k : knots_) s = std::max(s, k.value);
  return s;
}

const char* to_string(BoundCase c) noexcept {
  switch (c) {
    case BoundCase::UMain: return "U_main";
    case BoundCase::UDegenerate: return "U_degenerate";
    case BoundCase::LMain: return "L_main";
    case BoundCase::LDegenerate: return "L_degenerate";
    case BoundCase::General: return "general";
  }
  return "?";
}

BoundReport uniform_upper_bound(const CvarFunction& cvar_y, TailLevel level, double eps,
                                const SupportBounds& supports) {
  require_eps(eps, /*allow_one=*/true);
  supports.validate();
  BoundReport r = make_report(level, eps, supports);
  const double alpha = level.value();
  r.upper_case = alpha > eps ? BoundCase::UMain : BoundCase::UDegenerate;
  if (eps == 0.0) {
    r.upper = cvar_y(level);
    return r;
  }
  require_finite(supports.b_x, "b_x");
  require_finite(supports.b_y, "b_y");
  const double b = supports.b_max();
  if (alpha > eps) {
    const double w = eps / alpha;
    r.upper = w * b + (1.0 - w) * cvar_y(TailLevel(alpha - eps));
  } else {
    r.upper = b;
  }
  return r;
}

BoundReport uniform_lower_bound(const CvarFunction& cvar_y, double mean_y, TailLevel level,
                                double eps, const SupportBounds& supports) {
  require_eps(eps, /*allow_one=*/true);
  supports.validate();
  BoundReport r = make_report(level, eps, supports);
  const double alpha = level.value();
  if (eps == 0.0) {
    r.lower_case = BoundCase::LMain;
    r.lower = cvar_y(level);
    return r;
  }
  const double w = eps / alpha;
  if (alpha + eps <= 1.0) {
    r.lower_case = BoundCase::LMain;
    r.lower = (1.0 + w) * cvar_y(TailLevel(alpha + eps)) - w * cvar_y(TailLevel(eps));
  } else {
    require_finite(supports.a_x, "a_x");
    require_finite(supports.a_y, "a_y");
    r.lower_case = BoundCase::LDegenerate;
    r.lower = (mean_y - eps * cvar_y(TailLevel(eps)) + (alpha + eps - 1.0) * supports.a_min()) / alpha;
  }
  return r;
}

StepCdf construct_upper_cdf(const StepCdf& f_y, double eps, const SupportBounds& supports) {
  require_eps(eps, /*allow_one=*/false);
  supports.validate();
  require_finite(supports.b_x, "b_x");
  require_finite(supports.b_y, "b_y");
  check_cdf_within(f_y, supports);

  const double q = f_y.quantile_strict(eps);  // q^Y_{1-eps} = inf{F_Y > eps}
  const double start = std::max(supports.a_x, q);
  const double top = supports.b_max();

  std::vector<double> ys{start, top};
  for (double y : f_y.breakpoints()) {
    if (y > start && y < top) ys.push_back(y);
  }
  return build_from_points(std::move(ys), [&](double y) {
    if (y >= top) return 1.0;
    if (y >= start) return std::min(f_y(y) - eps, 1.0 - eps);
    return 0.0;
  });
}

StepCdf construct_lower_cdf(const StepCdf& f_y, double eps, const SupportBounds& supports) {
  require_eps(eps, /*allow_one=*/true);
  supports.validate();
  require_finite(supports.a_x, "a_x");
  require_finite(supports.a_y, "a_y");
  check_cdf_within(f_y, supports);

  const double a_min = supports.a_min();
  const double a_y = supports.a_y;
  const double q = f_y.quantile_strict(1.0 - eps);  // q^Y_eps = inf{F_Y > 1 - eps}
  const double end = std::min(q, supports.b_x);

  std::vector<double> ys{a_min, a_y};
  if (std::isfinite(end)) ys.push_back(end);
  for (double y : f_y.breakpoints()) {
    if (y < end) ys.push_back(y);
  }
  return build_from_points(std::move(ys), [&](double y) {
    if (y >= end) return 1.0;
    if (y >= a_y) return std::min(f_y(y) + eps, 1.0);
    if (y >= a_min) return eps;
    return 0.0;
  });
}

StepCdf g_envelope_lower_cdf(const StepCdf& f_y, const Envelope& g, int grid_points) {
  require(g.kind() == Envelope::Kind::PiecewiseLinearG, "invalid_envelope",
          "g_envelope_lower_cdf needs a monotone piecewise-linear g");
  require(grid_points >= 2, "invalid_argument", "grid_points must be at least 2");

  std::vector<double> t(f_y.breakpoints().begin(), f_y.breakpoints().end());
  for (const Knot& k : g.knots()) t.push_back(k.x);
  const double lo = f_y.min_support() - 1.0;
  const double hi = f_y.max_support() + 1.0;
  for (int i = 0; i < grid_points; ++i) {
    t.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1));
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());

  // On [t_k, t_{k+1}) F_Y is constant and g rises to its left limit at
  // t_{k+1}; using that supremum keeps the step CDF above min(1, F_Y + g).
  std::vector<double> ps(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double gk = (k + 1 < t.size()) ? g.left_limit(t[k + 1]) : g(t[k]);
    ps[k] = std::min(1.0, f_y(t[k]) + gk);
  }
  return StepCdf::from_candidates(t, ps);
}

Envelope density_h_to_g(const Envelope& h, int subdivisions) {
  require(h.kind() == Envelope::Kind::DensityH, "invalid_envelope", "density_h_to_g needs a density envelope");
  require(subdivisions >= 1, "invalid_argument", "subdivisions must be positive");
  const auto& k = h.knots();
  std::vector<Knot> out{{k.front().x, 0.0}};
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < k.size(); ++j) {
    const double w = k[j + 1].x - k[j].x;
    if (w == 0.0) continue;
    const double h0 = k[j].value;
    const double slope = (k[j + 1].value - h0) / w;
    for (int s = 1; s <= subdivisions; ++s) {
      const double d = (s == subdivisions) ? w : w * static_cast<double>(s) / subdivisions;
      const double value = acc + h0 * d + 0.5 * slope * d * d;
      out.push_back({k[j].x + d, std::max(value, out.back().value)});
    }
    acc = out.back().value;
  }
  return Envelope::piecewise_linear_g(std::move(out));
}

BoundReport general_g_bounds(const StepCdf& f_y, const Envelope& g, TailLevel level, int nodes) {
  require(g.kind() != Envelope::Kind::DensityH, "invalid_envelope",
          "general_g_bounds takes a CDF envelope g; convert h with density_h_to_g");
  require(nodes >= 2, "invalid_argument", "quadrature needs at least 2 nodes");
  BoundReport r = make_report(level, g.sup(), SupportBounds{});
  r.lower_case = BoundCase::General;
  r.upper_case = BoundCase::General;

  const double alpha = level.value();
  r.lower = integrate_quantile(ShiftedCdf(f_y, g, +1.0), alpha, nodes);
  if (!r.lower) r.lower_absent_reason = "unbounded_integrand";
  r.upper = integrate_quantile(ShiftedCdf(f_y, g, -1.0), alpha, nodes);
  if (!r.upper) r.upper_absent_reason = "unbounded_integrand";
  return r;
}

}  // namespace cvarbound
