#pragma once

namespace fnc {

// Standard normal CDF Phi(x).
double normal_cdf(double x);

// Upper tail 1 - Phi(x), computed through erfc so that large x does not
// cancel catastrophically. Relative accuracy is better than 1e-12 for
// |x| <= 8 (see tests/test_normal.cpp for the quadrature check).
double normal_tail(double x);

// Standard normal density.
double normal_pdf(double x);

// Inverse of normal_cdf on (0, 1). Throws std::domain_error outside.
double normal_quantile(double q);

}  // namespace fnc
