#include "fnc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fnc/normal.hpp"

namespace fnc {

void NullEnsemble::validate() const {
  if (n_sets() < 2) {
    throw std::invalid_argument("NullEnsemble: need at least 2 sets");
  }
  const std::size_t length = m();
  for (std::size_t a = 0; a < pvalue_sets.size(); ++a) {
    if (pvalue_sets[a].size() != length) {
      throw std::invalid_argument("NullEnsemble: set " + std::to_string(a) +
                                  " has inconsistent length");
    }
    for (const double p : pvalue_sets[a]) {
      if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("NullEnsemble: p-value outside (0,1] in set " +
                                    std::to_string(a));
      }
    }
  }
}

VStatistics v_statistics(std::span<const double> p_sorted) {
  const std::size_t m = p_sorted.size();
  if (m < 3) {
    throw std::domain_error("v_statistics: need m >= 3 for an interior rank");
  }
  VStatistics v;
  const double m_real = static_cast<double>(m);
  for (std::size_t j = 2; j <= m - 1; ++j) {  // 1-based interior: 1 < j < m
    const double p = p_sorted[j - 1];
    const double deviation = std::fabs(static_cast<double>(j) / m_real - p);
    v.v_half = std::max(v.v_half, deviation / std::sqrt(p));
    v.v_one = std::max(v.v_one, deviation / p);
  }
  return v;
}

double calibration_quantile_level(std::size_t m) {
  return 1.0 - 1.0 / std::sqrt(std::log(static_cast<double>(m)));
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("nearest_rank_quantile: empty input");
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::domain_error("nearest_rank_quantile: q must lie in (0, 1]");
  }
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(values.size())));
  if (rank < 1) rank = 1;
  if (rank > values.size()) rank = values.size();
  return values[rank - 1];
}

BoundingSequences bounding_sequences(const NullEnsemble& ensemble, ExecutionPolicy policy) {
  ensemble.validate();
  if (ensemble.m() < 3) {
    throw std::invalid_argument("bounding_sequences: sets must have length >= 3");
  }
  const std::size_t n = ensemble.n_sets();
  std::vector<double> v_half(n);
  std::vector<double> v_one(n);
  for_each_index(policy, n, [&](std::size_t a) {
    std::vector<double> sorted = ensemble.pvalue_sets[a];
    std::sort(sorted.begin(), sorted.end());
    const VStatistics v = v_statistics(sorted);
    v_half[a] = v.v_half;
    v_one[a] = v.v_one;
  });
  BoundingSequences bounds;
  bounds.m = ensemble.m();
  bounds.n_sets = n;
  bounds.quantile_level = calibration_quantile_level(bounds.m);
  bounds.c_half = nearest_rank_quantile(std::move(v_half), bounds.quantile_level);
  bounds.c_one = nearest_rank_quantile(std::move(v_one), bounds.quantile_level);
  return bounds;
}

NullEnsemble simulate_null_ensemble(const CovarianceModel& model, std::size_t n_sets,
                                    std::uint64_t seed, Sidedness sidedness,
                                    ExecutionPolicy policy) {
  if (n_sets < 2) {
    throw std::invalid_argument("simulate_null_ensemble: need n_sets >= 2");
  }
  const CovarianceSampler sampler(model);
  NullEnsemble ensemble;
  ensemble.provenance = NullEnsemble::Provenance::parametric_gaussian;
  ensemble.source = model.describe();
  ensemble.seed = seed;
  ensemble.pvalue_sets.assign(n_sets, std::vector<double>());
  for_each_index(policy, n_sets, [&](std::size_t a) {
    Rng rng(seed, a);
    std::vector<double> z(model.m);
    sampler.sample(rng, z);
    auto& p = ensemble.pvalue_sets[a];
    p.resize(model.m);
    for (std::size_t j = 0; j < model.m; ++j) {
      double value = (sidedness == Sidedness::one_sided)
                         ? normal_tail(z[j])
                         : 2.0 * normal_tail(std::fabs(z[j]));
      if (value < kPValueFloor) value = kPValueFloor;
      if (value > 1.0) value = 1.0;
      p[j] = value;
    }
  });
  return ensemble;
}

BoundingSequences calibrate_model(const CovarianceModel& model, std::size_t n_sets,
                                  std::uint64_t seed, Sidedness sidedness,
                                  ExecutionPolicy policy) {
  return bounding_sequences(simulate_null_ensemble(model, n_sets, seed, sidedness, policy),
                            policy);
}

}  // namespace fnc
