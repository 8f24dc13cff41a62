#pragma once

// Analytic distributions used by the experiments: truncated Normal, truncated
// Gaussian mixture, Beta and Laplace. Sampling is by inverse-CDF transform of
// a counter-based uniform stream, so a (spec, n, seed) triple always yields
// the same batch and the per-draw cost does not depend on rejection.

#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cvarbound/riskcore.hpp"

namespace cvarbound::dist {

struct TruncatedNormal {
  double mu = 0.0;
  double sigma2 = 1.0;
  double a = -1.0;
  double b = 1.0;
};

struct GmmComponent {
  double weight = 1.0;
  double mu = 0.0;
  double sigma2 = 1.0;
};

struct TruncatedGmm {
  std::vector<GmmComponent> components;  // weights normalised to sum 1
  double a = -1.0;
  double b = 1.0;
};

struct Beta {
  double alpha = 1.0;
  double beta = 1.0;
};

struct Laplace {
  double location = 0.0;
  double scale = 1.0;
};

class DistributionSpec {
 public:
  using Variant = std::variant<TruncatedNormal, TruncatedGmm, Beta, Laplace>;

  // Validates parameters; GMM weights are treated as relative and normalised.
  DistributionSpec(Variant v);  // NOLINT(google-explicit-constructor)
  template <class T>
    requires(!std::is_same_v<std::decay_t<T>, Variant> && std::is_constructible_v<Variant, T>)
  DistributionSpec(T&& t)  // NOLINT(google-explicit-constructor)
      : DistributionSpec(Variant(std::forward<T>(t))) {}

  const Variant& variant() const noexcept { return v_; }
  std::string kind() const;
  // Finite support [lo, hi]; infinite ends for Laplace.
  double lower() const noexcept;
  double upper() const noexcept;

 private:
  Variant v_;
};

double cdf(const DistributionSpec& spec, double x);
double pdf(const DistributionSpec& spec, double x);
// inf{x : F(x) >= v}; |x - x*| <= 1e-12 where no closed form exists.
double quantile(const DistributionSpec& spec, double v);
double mean(const DistributionSpec& spec);

SampleBatch sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

// (1/a) * integral_{1-a}^{1} Q(v) dv by composite trapezoid with `nodes`
// nodes (error O(nodes^-2) for smooth Q). Laplace uses its closed form since
// its quantile is unbounded at v = 1.
double true_cvar(const DistributionSpec& spec, TailLevel level, int nodes);

// max_j |F_X(e_j) - F_Y(e_j)| over `bins` + 1 uniform edges on [lo, hi].
// With `sim_n`, the CDFs are replaced by ECDFs of `sim_n` draws each
// (streams 0 and 1 of `seed`), as in a simulation-based estimate.
double binned_discrepancy(const DistributionSpec& x, const DistributionSpec& y, int bins, double lo,
                          double hi, std::optional<std::size_t> sim_n = std::nullopt,
                          std::uint64_t seed = 0);

// Truncated Normal on the same [a, b] with the mixture's untruncated mean and
// variance.
DistributionSpec moment_matched_normal(const DistributionSpec& gmm);

// Five-component mixture on [-1, 1] used by the surrogate experiments.
DistributionSpec experiment_gmm();

// Short human-readable label, e.g. "beta(2,2)".
std::string describe(const DistributionSpec& spec);

DistributionSpec from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistributionSpec& spec);

}  // namespace cvarbound::dist
