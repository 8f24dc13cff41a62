#pragma once

namespace cvarbound::special {

// Standard normal distribution function, via erfc (accurate in both tails).
double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

// Inverse of normal_cdf on (0, 1): Acklam's rational approximation followed
// by one Halley step against normal_cdf. Returns -inf / +inf at 0 / 1.
double normal_quantile(double p) noexcept;

}  // namespace cvarbound::special
