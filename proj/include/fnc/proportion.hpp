#pragma once

#include <cstddef>
#include <span>

#include "fnc/calibration.hpp"
#include "fnc/statistics.hpp"

namespace fnc {

enum class ProportionVariant { pvalue_form, discretized_t_form };

struct ProportionEstimate {
  double pi_hat = 0.0;   // max(pi_half, pi_one, 0)
  double pi_half = 0.0;  // best term under the sqrt(p) penalty
  double pi_one = 0.0;   // best term under the linear penalty
  std::size_t argmax_index = 0;  // 1-based rank (or grid point) attaining pi_hat; 0 when floored
  ProportionVariant variant = ProportionVariant::pvalue_form;
  std::size_t s_hat = 0;
  std::size_t skipped_terms = 0;  // ranks with p_(j) = 1 (zero divisor)

  bool detectable() const { return pi_hat > 0.0; }
};

// round(m * pi_hat), half away from zero, floored at 1 whenever pi_hat > 0.
std::size_t signal_count_estimate(double pi_hat, std::size_t m);

// Signal proportion estimate from ascending p-values: per rank j in the
// interior (1 < j < m),
//   (j/m - p_(j) - c * penalty(p_(j))) / (1 - p_(j)),
// penalty sqrt(p) with c_half and p with c_one; maxima floored at zero.
ProportionEstimate estimate_proportion(std::span<const double> p_sorted,
                                       const BoundingSequences& bounds);

// Theory-facing discretized form on the grid T = [1, sqrt(5 log m)] ∩ N:
//   (R(t)/m - 2 PhiBar(t) - c * delta(t)) / (1 - 2 PhiBar(t)),
// delta in {PhiBar^(1/2), PhiBar}. R(t) counts z_j > t for one-sided input
// and |z_j| > t for two-sided input.
ProportionEstimate estimate_proportion_discretized(const StatisticVector& z,
                                                   const BoundingSequences& bounds);

// Integer grid upper end: floor(sqrt(5 log m)). Throws std::domain_error if
// the grid would be empty.
std::size_t discretized_grid_max(std::size_t m);

}  // namespace fnc
