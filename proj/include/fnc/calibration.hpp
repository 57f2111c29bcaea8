#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fnc/covariance.hpp"
#include "fnc/parallel.hpp"
#include "fnc/statistics.hpp"

namespace fnc {

// N sets of null p-values of common length m, each set a draw of the joint
// null distribution of the test statistics.
struct NullEnsemble {
  enum class Provenance { parametric_gaussian, external };

  std::vector<std::vector<double>> pvalue_sets;
  Provenance provenance = Provenance::external;
  std::string source;       // model description or file path
  std::uint64_t seed = 0;   // meaningful for parametric_gaussian only

  std::size_t m() const { return pvalue_sets.empty() ? 0 : pvalue_sets.front().size(); }
  std::size_t n_sets() const { return pvalue_sets.size(); }
  void validate() const;  // throws std::invalid_argument
};

struct VStatistics {
  double v_half = 0.0;  // max over interior ranks of |j/m - p_(j)| / sqrt(p_(j))
  double v_one = 0.0;   // same with divisor p_(j)
};

// Uniform-deviation statistics of one ascending p-value set. Interior ranks
// only (1 < j < m, 1-based); m must be >= 3.
VStatistics v_statistics(std::span<const double> p_sorted);

struct BoundingSequences {
  double c_half = 0.0;
  double c_one = 0.0;
  std::size_t m = 0;
  std::size_t n_sets = 0;
  double quantile_level = 0.0;
};

// 1 - 1/sqrt(log m), natural log.
double calibration_quantile_level(std::size_t m);

// Nearest-rank empirical quantile: the ceil(q*n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

// V statistics per set, then the (1 - 1/sqrt(log m))-quantile across sets.
BoundingSequences bounding_sequences(const NullEnsemble& ensemble,
                                     ExecutionPolicy policy = ExecutionPolicy::parallel);

// n_sets independent centered draws from the model, mapped to p-values with
// the given sidedness. Set a is generated from substream (seed, a), so the
// ensemble is identical under serial and parallel execution.
NullEnsemble simulate_null_ensemble(const CovarianceModel& model, std::size_t n_sets,
                                    std::uint64_t seed,
                                    Sidedness sidedness = Sidedness::one_sided,
                                    ExecutionPolicy policy = ExecutionPolicy::parallel);

// Convenience: simulate an ensemble and calibrate in one step.
BoundingSequences calibrate_model(const CovarianceModel& model, std::size_t n_sets,
                                  std::uint64_t seed,
                                  Sidedness sidedness = Sidedness::one_sided,
                                  ExecutionPolicy policy = ExecutionPolicy::parallel);

}  // namespace fnc
