#include "fnc/proportion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fnc/normal.hpp"

namespace fnc {

std::size_t signal_count_estimate(double pi_hat, std::size_t m) {
  if (pi_hat <= 0.0) return 0;
  const double scaled = pi_hat * static_cast<double>(m);
  std::size_t s_hat = static_cast<std::size_t>(std::llround(scaled));
  if (s_hat < 1) s_hat = 1;
  return s_hat;
}

ProportionEstimate estimate_proportion(std::span<const double> p_sorted,
                                       const BoundingSequences& bounds) {
  const std::size_t m = p_sorted.size();
  if (m < 3) {
    throw std::domain_error("estimate_proportion: need m >= 3 for an interior rank");
  }
  if (bounds.m != 0 && bounds.m != m) {
    throw std::invalid_argument("estimate_proportion: bounds were calibrated for m = " +
                                std::to_string(bounds.m) + ", input has m = " +
                                std::to_string(m));
  }
  ProportionEstimate estimate;
  estimate.variant = ProportionVariant::pvalue_form;
  double best_half = -std::numeric_limits<double>::infinity();
  double best_one = -std::numeric_limits<double>::infinity();
  std::size_t argmax_half = 0;
  std::size_t argmax_one = 0;
  const double m_real = static_cast<double>(m);
  for (std::size_t j = 2; j <= m - 1; ++j) {
    const double p = p_sorted[j - 1];
    if (p >= 1.0) {
      ++estimate.skipped_terms;
      continue;
    }
    const double base = static_cast<double>(j) / m_real - p;
    const double denom = 1.0 - p;
    const double term_half = (base - bounds.c_half * std::sqrt(p)) / denom;
    const double term_one = (base - bounds.c_one * p) / denom;
    if (term_half > best_half) {
      best_half = term_half;
      argmax_half = j;
    }
    if (term_one > best_one) {
      best_one = term_one;
      argmax_one = j;
    }
  }
  estimate.pi_half = best_half;
  estimate.pi_one = best_one;
  estimate.pi_hat = std::max({best_half, best_one, 0.0});
  if (estimate.pi_hat > 0.0) {
    estimate.argmax_index = (best_half >= best_one) ? argmax_half : argmax_one;
  }
  estimate.s_hat = signal_count_estimate(estimate.pi_hat, m);
  return estimate;
}

std::size_t discretized_grid_max(std::size_t m) {
  if (m < 2) throw std::domain_error("discretized_grid_max: need m >= 2");
  const double upper = std::sqrt(5.0 * std::log(static_cast<double>(m)));
  if (upper < 1.0) {
    throw std::domain_error("discretized_grid_max: grid [1, sqrt(5 log m)] is empty");
  }
  return static_cast<std::size_t>(std::floor(upper));
}

ProportionEstimate estimate_proportion_discretized(const StatisticVector& z,
                                                   const BoundingSequences& bounds) {
  z.validate();
  if (z.scale != Scale::z) {
    throw std::invalid_argument("estimate_proportion_discretized: input must be z scale");
  }
  const std::size_t m = z.size();
  const std::size_t t_max = discretized_grid_max(m);
  ProportionEstimate estimate;
  estimate.variant = ProportionVariant::discretized_t_form;
  double best_half = -std::numeric_limits<double>::infinity();
  double best_one = -std::numeric_limits<double>::infinity();
  std::size_t argmax_half = 0;
  std::size_t argmax_one = 0;
  const bool two_sided = z.sidedness == Sidedness::two_sided;
  for (std::size_t t = 1; t <= t_max; ++t) {
    const double threshold = static_cast<double>(t);
    std::size_t exceed = 0;
    for (const double value : z.values) {
      const double magnitude = two_sided ? std::fabs(value) : value;
      if (magnitude > threshold) ++exceed;
    }
    const double tail = normal_tail(threshold);
    const double centered =
        static_cast<double>(exceed) / static_cast<double>(m) - 2.0 * tail;
    const double denom = 1.0 - 2.0 * tail;
    const double term_half = (centered - bounds.c_half * std::sqrt(tail)) / denom;
    const double term_one = (centered - bounds.c_one * tail) / denom;
    if (term_half > best_half) {
      best_half = term_half;
      argmax_half = t;
    }
    if (term_one > best_one) {
      best_one = term_one;
      argmax_one = t;
    }
  }
  estimate.pi_half = best_half;
  estimate.pi_one = best_one;
  estimate.pi_hat = std::max({best_half, best_one, 0.0});
  if (estimate.pi_hat > 0.0) {
    estimate.argmax_index = (best_half >= best_one) ? argmax_half : argmax_one;
  }
  estimate.s_hat = signal_count_estimate(estimate.pi_hat, m);
  return estimate;
}

}  // namespace fnc
