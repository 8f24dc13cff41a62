#include "cvarbound/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "cvarbound/concentration.hpp"
#include "cvarbound/error.hpp"
#include "cvarbound/rng.hpp"
#include "cvarbound/special.hpp"

namespace cvarbound::dist {
namespace {

using special::normal_cdf;
using special::normal_pdf;
using special::normal_quantile;

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double v, const char* what) {
  require(std::isfinite(v), "invalid_distribution", std::string(what) + " must be finite");
}

// Mass of N(mu, sigma2) on [a, b].
double normal_mass(double mu, double sigma2, double a, double b) {
  const double s = std::sqrt(sigma2);
  return normal_cdf((b - mu) / s) - normal_cdf((a - mu) / s);
}

double gmm_raw_cdf(const TruncatedGmm& g, double x) {
  double acc = 0.0;
  for (const auto& c : g.components) acc += c.weight * normal_cdf((x - c.mu) / std::sqrt(c.sigma2));
  return acc;
}

double gmm_raw_pdf(const TruncatedGmm& g, double x) {
  double acc = 0.0;
  for (const auto& c : g.components) {
    const double s = std::sqrt(c.sigma2);
    acc += c.weight * normal_pdf((x - c.mu) / s) / s;
  }
  return acc;
}

double gmm_mass(const TruncatedGmm& g) { return gmm_raw_cdf(g, g.b) - gmm_raw_cdf(g, g.a); }

double tn_cdf(const TruncatedNormal& t, double x) {
  if (x <= t.a) return 0.0;
  if (x >= t.b) return 1.0;
  const double s = std::sqrt(t.sigma2);
  const double lo = normal_cdf((t.a - t.mu) / s);
  const double z = normal_cdf((t.b - t.mu) / s) - lo;
  return std::clamp((normal_cdf((x - t.mu) / s) - lo) / z, 0.0, 1.0);
}

double gmm_cdf(const TruncatedGmm& g, double x) {
  if (x <= g.a) return 0.0;
  if (x >= g.b) return 1.0;
  const double lo = gmm_raw_cdf(g, g.a);
  const double z = gmm_raw_cdf(g, g.b) - lo;
  return std::clamp((gmm_raw_cdf(g, x) - lo) / z, 0.0, 1.0);
}

// Safeguarded Newton on a continuous increasing CDF over [lo, hi].
template <class Cdf, class Pdf>
double invert_cdf(Cdf&& f, Pdf&& density, double v, double lo, double hi, double guess) {
  double x = std::clamp(guess, lo, hi);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double err = f(x) - v;
    if (err == 0.0) return x;
    if (err < 0.0) lo = x; else hi = x;
    const double d = density(x);
    double next = (d > 0.0) ? x - err / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) < 1e-13) return next;
    x = next;
  }
  return x;
}

double gmm_quantile(const TruncatedGmm& g, double v, double guess) {
  if (v <= 0.0) return g.a;
  if (v >= 1.0) return g.b;
  const double base = gmm_raw_cdf(g, g.a);
  const double z = gmm_raw_cdf(g, g.b) - base;
  const double target = base + v * z;
  return invert_cdf([&](double x) { return gmm_raw_cdf(g, x); },
                    [&](double x) { return gmm_raw_pdf(g, x); }, target, g.a, g.b, guess);
}

double quantile_with_guess(const DistributionSpec& spec, double v, double guess) {
  return std::visit(
      Overloaded{
          [&](const TruncatedNormal& t) {
            if (v <= 0.0) return t.a;
            if (v >= 1.0) return t.b;
            const double s = std::sqrt(t.sigma2);
            const double lo = normal_cdf((t.a - t.mu) / s);
            const double hi = normal_cdf((t.b - t.mu) / s);
            return std::clamp(t.mu + s * normal_quantile(lo + v * (hi - lo)), t.a, t.b);
          },
          [&](const TruncatedGmm& g) { return gmm_quantile(g, v, guess); },
          [&](const Beta& b) {
            if (v <= 0.0) return 0.0;
            if (v >= 1.0) return 1.0;
            return boost::math::ibeta_inv(b.alpha, b.beta, v);
          },
          [&](const Laplace& l) {
            if (v <= 0.0) return -kInf;
            if (v >= 1.0) return kInf;
            return v < 0.5 ? l.location + l.scale * std::log(2.0 * v)
                           : l.location - l.scale * std::log(2.0 * (1.0 - v));
          },
      },
      spec.variant());
}

double laplace_cvar(const Laplace& l, double alpha) {
  if (alpha <= 0.5) return l.location + l.scale * (1.0 - std::log(2.0 * alpha));
  const double p = 1.0 - alpha;
  if (p <= 0.0) return l.location;
  return l.location - l.scale * p * (std::log(2.0 * p) - 1.0) / alpha;
}

}  // namespace

DistributionSpec::DistributionSpec(Variant v) : v_(std::move(v)) {
  std::visit(Overloaded{
                 [](TruncatedNormal& t) {
                   require_finite(t.mu, "mu");
                   require_finite(t.sigma2, "sigma2");
                   require_finite(t.a, "a");
                   require_finite(t.b, "b");
                   require(t.sigma2 > 0.0, "invalid_distribution", "sigma2 must be positive");
                   require(t.a < t.b, "invalid_distribution", "truncation needs a < b");
                   require(normal_mass(t.mu, t.sigma2, t.a, t.b) > 0.0, "invalid_distribution",
                           "truncation interval carries no mass");
                 },
                 [](TruncatedGmm& g) {
                   require(!g.components.empty(), "invalid_distribution", "mixture needs components");
                   require_finite(g.a, "a");
                   require_finite(g.b, "b");
                   require(g.a < g.b, "invalid_distribution", "truncation needs a < b");
                   double total = 0.0;
                   for (const auto& c : g.components) {
                     require_finite(c.weight, "weight");
                     require_finite(c.mu, "mu");
                     require_finite(c.sigma2, "sigma2");
                     require(c.weight > 0.0, "invalid_distribution", "mixture weights must be positive");
                     require(c.sigma2 > 0.0, "invalid_distribution", "sigma2 must be positive");
                     total += c.weight;
                   }
                   for (auto& c : g.components) c.weight /= total;
                   require(gmm_mass(g) > 0.0, "invalid_distribution", "truncation interval carries no mass");
                 },
                 [](Beta& b) {
                   require(std::isfinite(b.alpha) && b.alpha > 0.0 && std::isfinite(b.beta) && b.beta > 0.0,
                           "invalid_distribution", "beta shapes must be positive and finite");
                 },
                 [](Laplace& l) {
                   require_finite(l.location, "location");
                   require(std::isfinite(l.scale) && l.scale > 0.0, "invalid_distribution",
                           "laplace scale must be positive");
                 },
             },
             v_);
}

std::string DistributionSpec::kind() const {
  return std::visit(Overloaded{
                        [](const TruncatedNormal&) { return std::string("truncated_normal"); },
                        [](const TruncatedGmm&) { return std::string("truncated_gmm"); },
                        [](const Beta&) { return std::string("beta"); },
                        [](const Laplace&) { return std::string("laplace"); },
                    },
                    v_);
}

double DistributionSpec::lower() const noexcept {
  return std::visit(Overloaded{
                        [](const TruncatedNormal& t) { return t.a; },
                        [](const TruncatedGmm& g) { return g.a; },
                        [](const Beta&) { return 0.0; },
                        [](const Laplace&) { return -kInf; },
                    },
                    v_);
}

double DistributionSpec::upper() const noexcept {
  return std::visit(Overloaded{
                        [](const TruncatedNormal& t) { return t.b; },
                        [](const TruncatedGmm& g) { return g.b; },
                        [](const Beta&) { return 1.0; },
                        [](const Laplace&) { return kInf; },
                    },
                    v_);
}

double cdf(const DistributionSpec& spec, double x) {
  return std::visit(Overloaded{
                        [&](const TruncatedNormal& t) { return tn_cdf(t, x); },
                        [&](const TruncatedGmm& g) { return gmm_cdf(g, x); },
                        [&](const Beta& b) {
                          if (x <= 0.0) return 0.0;
                          if (x >= 1.0) return 1.0;
                          return boost::math::ibeta(b.alpha, b.beta, x);
                        },
                        [&](const Laplace& l) {
                          const double u = (x - l.location) / l.scale;
                          return u < 0.0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
                        },
                    },
                    spec.variant());
}

double pdf(const DistributionSpec& spec, double x) {
  return std::visit(Overloaded{
                        [&](const TruncatedNormal& t) {
                          if (x < t.a || x > t.b) return 0.0;
                          const double s = std::sqrt(t.sigma2);
                          return normal_pdf((x - t.mu) / s) / s / normal_mass(t.mu, t.sigma2, t.a, t.b);
                        },
                        [&](const TruncatedGmm& g) {
                          if (x < g.a || x > g.b) return 0.0;
                          return gmm_raw_pdf(g, x) / gmm_mass(g);
                        },
                        [&](const Beta& b) {
                          if (x < 0.0 || x > 1.0) return 0.0;
                          return boost::math::ibeta_derivative(b.alpha, b.beta, x);
                        },
                        [&](const Laplace& l) {
                          return 0.5 / l.scale * std::exp(-std::fabs(x - l.location) / l.scale);
                        },
                    },
                    spec.variant());
}

double quantile(const DistributionSpec& spec, double v) {
  const double guess = std::isfinite(spec.lower()) && std::isfinite(spec.upper())
                           ? spec.lower() + v * (spec.upper() - spec.lower())
                           : 0.0;
  return quantile_with_guess(spec, v, guess);
}

double mean(const DistributionSpec& spec) {
  return std::visit(Overloaded{
                        [](const TruncatedNormal& t) {
                          const double s = std::sqrt(t.sigma2);
                          const double lo = (t.a - t.mu) / s;
                          const double hi = (t.b - t.mu) / s;
                          return t.mu + s * (normal_pdf(lo) - normal_pdf(hi)) / (normal_cdf(hi) - normal_cdf(lo));
                        },
                        [](const TruncatedGmm& g) {
                          double num = 0.0;
                          for (const auto& c : g.components) {
                            const double s = std::sqrt(c.sigma2);
                            const double lo = (g.a - c.mu) / s;
                            const double hi = (g.b - c.mu) / s;
                            num += c.weight * (c.mu * (normal_cdf(hi) - normal_cdf(lo)) +
                                               s * (normal_pdf(lo) - normal_pdf(hi)));
                          }
                          return num / gmm_mass(g);
                        },
                        [](const Beta& b) { return b.alpha / (b.alpha + b.beta); },
                        [](const Laplace& l) { return l.location; },
                    },
                    spec.variant());
}

SampleBatch sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "invalid_n", "sample size must be at least 1");
  const CounterRng rng(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = quantile(spec, rng.uniform(i));
  return SampleBatch(std::move(out));
}

double true_cvar(const DistributionSpec& spec, TailLevel level, int nodes) {
  require(nodes >= 1000, "invalid_argument", "true_cvar needs at least 1000 quadrature nodes");
  const double alpha = level.value();
  if (const auto* l = std::get_if<Laplace>(&spec.variant())) return laplace_cvar(*l, alpha);

  const double lo = 1.0 - alpha;
  const double h = alpha / static_cast<double>(nodes - 1);
  double sum = 0.0;
  double prev = std::isfinite(spec.lower()) ? spec.lower() : 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double v = (i == nodes - 1) ? 1.0 : lo + alpha * static_cast<double>(i) / static_cast<double>(nodes - 1);
    const double q = quantile_with_guess(spec, v, prev);
    prev = q;
    sum += (i == 0 || i == nodes - 1) ? 0.5 * q : q;
  }
  return sum * h / alpha;
}

double binned_discrepancy(const DistributionSpec& x, const DistributionSpec& y, int bins, double lo,
                          double hi, std::optional<std::size_t> sim_n, std::uint64_t seed) {
  require(bins >= 2, "invalid_argument", "binned discrepancy needs at least 2 bins");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "invalid_argument", "binning range needs lo < hi");

  std::optional<StepCdf> ex;
  std::optional<StepCdf> ey;
  if (sim_n) {
    ex = ecdf(sample(x, *sim_n, derive_seed(seed, 0)));
    ey = ecdf(sample(y, *sim_n, derive_seed(seed, 1)));
  }
  double worst = 0.0;
  for (int j = 0; j <= bins; ++j) {
    const double e = lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(bins));
    const double fx = ex ? (*ex)(e) : cdf(x, e);
    const double fy = ey ? (*ey)(e) : cdf(y, e);
    worst = std::max(worst, std::fabs(fx - fy));
  }
  return worst;
}

DistributionSpec moment_matched_normal(const DistributionSpec& gmm) {
  const auto* g = std::get_if<TruncatedGmm>(&gmm.variant());
  require(g != nullptr, "invalid_distribution", "moment matching expects a truncated_gmm");
  double m1 = 0.0;
  double m2 = 0.0;
  for (const auto& c : g->components) {
    m1 += c.weight * c.mu;
    m2 += c.weight * (c.sigma2 + c.mu * c.mu);
  }
  return TruncatedNormal{m1, m2 - m1 * m1, g->a, g->b};
}

DistributionSpec experiment_gmm() {
  return TruncatedGmm{{{0.6, 0.2, 0.5}, {0.4, -0.2, 0.2}, {0.1, -0.5, 0.1}, {0.1, 0.5, 0.1}, {0.8, 0.0, 0.3}},
                      -1.0,
                      1.0};
}

std::string describe(const DistributionSpec& spec) {
  auto fmt = [](const char* pattern, auto... xs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, xs...);
    return std::string(buf);
  };
  return std::visit(Overloaded{
                        [&](const TruncatedNormal& t) {
                          return fmt("truncated_normal(%g,%g,%g,%g)", t.mu, t.sigma2, t.a, t.b);
                        },
                        [&](const TruncatedGmm& g) {
                          return fmt("truncated_gmm(%zu,%g,%g)", g.components.size(), g.a, g.b);
                        },
                        [&](const Beta& b) { return fmt("beta(%g,%g)", b.alpha, b.beta); },
                        [&](const Laplace& l) { return fmt("laplace(%g,%g)", l.location, l.scale); },
                    },
                    spec.variant());
}

namespace {

double get_number(const nlohmann::json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_number(), "invalid_distribution",
          std::string("distribution field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

DistributionSpec from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("kind") && j.at("kind").is_string(), "invalid_distribution",
          "distribution must be an object with a string 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "truncated_normal") {
    return TruncatedNormal{get_number(j, "mu"), get_number(j, "sigma2"), get_number(j, "a"), get_number(j, "b")};
  }
  if (kind == "truncated_gmm") {
    require(j.contains("components") && j.at("components").is_array(), "invalid_distribution",
            "truncated_gmm needs a 'components' array");
    TruncatedGmm g;
    for (const auto& c : j.at("components")) {
      g.components.push_back({get_number(c, "weight"), get_number(c, "mu"), get_number(c, "sigma2")});
    }
    g.a = get_number(j, "a");
    g.b = get_number(j, "b");
    return g;
  }
  if (kind == "beta") return Beta{get_number(j, "alpha"), get_number(j, "beta")};
  if (kind == "laplace") return Laplace{get_number(j, "location"), get_number(j, "scale")};
  throw ValidationError("invalid_distribution", "unknown distribution kind '" + kind + "'");
}

nlohmann::json to_json(const DistributionSpec& spec) {
  return std::visit(Overloaded{
                        [](const TruncatedNormal& t) {
                          return nlohmann::json{{"kind", "truncated_normal"}, {"mu", t.mu}, {"sigma2", t.sigma2},
                                                {"a", t.a}, {"b", t.b}};
                        },
                        [](const TruncatedGmm& g) {
                          nlohmann::json comps = nlohmann::json::array();
                          for (const auto& c : g.components) {
                            comps.push_back({{"weight", c.weight}, {"mu", c.mu}, {"sigma2", c.sigma2}});
                          }
                          return nlohmann::json{{"kind", "truncated_gmm"}, {"components", comps},
                                                {"a", g.a}, {"b", g.b}};
                        },
                        [](const Beta& b) {
                          return nlohmann::json{{"kind", "beta"}, {"alpha", b.alpha}, {"beta", b.beta}};
                        },
                        [](const Laplace& l) {
                          return nlohmann::json{{"kind", "laplace"}, {"location", l.location}, {"scale", l.scale}};
                        },
                    },
                    spec.variant());
}

}  // namespace cvarbound::dist
