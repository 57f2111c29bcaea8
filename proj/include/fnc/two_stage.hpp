#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fnc/calibration.hpp"
#include "fnc/covariance.hpp"
#include "fnc/parallel.hpp"
#include "fnc/screening.hpp"

namespace fnc {

// Split-sample screening pipeline: stage 1 screens all variants on a small
// sample fraction, stage 2 confirms the survivors on the remainder with
// Bonferroni at the family-wise level; the baseline is one-stage Bonferroni
// on the pooled sample.
struct TwoStageConfig {
  std::size_t m = 0;
  GroundTruth truth;
  std::vector<double> effect;  // per-variant z-scale effect at sample size n_ref;
                               // zero off the signal set
  double n_total = 1.0;
  double n_ref = 1.0;
  double split_fraction = 0.3;  // stage-1 share of the sample
  double alpha = 0.05;
  double beta = 0.1;
  std::size_t m_eff = 0;  // one-stage Bonferroni divisor; 0 means m
  std::size_t n_reps = 100;
  std::uint64_t seed = 0;
  Sidedness sidedness = Sidedness::one_sided;
  std::optional<CovarianceModel> model;  // noise covariance per stage; identity if absent
  SignalCountSource s_source = SignalCountSource::estimated;
  std::optional<BoundingSequences> stage1_bounds;  // required when estimating s

  void validate() const;
};

struct TwoStageRepRecord {
  std::uint64_t rep = 0;
  std::vector<std::size_t> stage1_selected;
  std::vector<std::size_t> stage2_significant;   // subset of stage1_selected
  std::vector<std::size_t> one_stage_significant;
  double pi_hat = -1.0;
  std::size_t s_hat = 0;
  bool refused = false;  // stage 1 found no detectable signal
  std::vector<double> stage2_pvalues;  // of stage-1 survivors, histogram fodder
};

struct TwoStageResult {
  std::vector<TwoStageRepRecord> records;
  // A false positive is any finally-significant variant with zero effect.
  double fwer_two_stage = 0.0;
  double fwer_one_stage = 0.0;
  // Power: expected fraction of true (nonzero-effect) signals declared
  // significant.
  double power_two_stage = 0.0;
  double power_one_stage = 0.0;
  double mean_stage1_count = 0.0;
  double mean_stage2_count = 0.0;
  std::size_t refusals = 0;
};

// Per-variant z-scores for the two stages: stage i has mean
// A_j * sqrt(n_i / n_ref) on the signal set and Sigma-structured noise,
// independent across stages. Returned vectors are on the z scale.
std::pair<StatisticVector, StatisticVector> simulate_split_statistics(
    const TwoStageConfig& config, const CovarianceSampler* sampler, Rng& rng);

TwoStageResult run_two_stage(const TwoStageConfig& config,
                             ExecutionPolicy policy = ExecutionPolicy::parallel);

}  // namespace fnc
