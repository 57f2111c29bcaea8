#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fnc/calibration.hpp"
#include "fnc/classification.hpp"
#include "fnc/covariance.hpp"
#include "fnc/parallel.hpp"
#include "fnc/screening.hpp"

namespace fnc {

// Sparsity/intensity grid: s = round(m^(1-gamma)) signals at common
// intensity A (or per-signal intensities when provided).
struct SparsitySpec {
  double gamma = 0.3;
  double intensity = 3.0;
  std::vector<double> per_signal;  // optional, length s when non-empty

  std::size_t signal_count(std::size_t m) const;
  void validate(std::size_t m) const;
};

struct MethodSpec {
  SelectionMethod method = SelectionMethod::fnc;
  double level = 0.1;  // beta for FNC, alpha for the baselines
  SignalCountSource s_source = SignalCountSource::known;
  std::size_t m_eff = 0;  // bonferroni divisor; 0 means m

  std::string label() const;
};

struct ExperimentConfig {
  std::size_t m = 0;
  CovarianceModel model;
  SparsitySpec sparsity;
  std::vector<MethodSpec> methods;
  std::size_t n_reps = 100;
  std::uint64_t seed = 0;
  Sidedness sidedness = Sidedness::one_sided;
  // Required by any method with estimated s; carried here so the whole run
  // is reproducible from the config alone.
  std::optional<BoundingSequences> bounds;

  void validate() const;  // throws std::invalid_argument on bad combinations
};

struct MethodRepRecord {
  Metrics metrics;
  std::size_t k = 0;
  std::size_t s_used = 0;
  double pi_hat = -1.0;  // estimated-s FNC only; -1 elsewhere
  bool refused = false;  // pi_hat was 0: nothing selected by design
};

struct ReplicationRecord {
  std::uint64_t rep = 0;
  std::vector<MethodRepRecord> per_method;
};

struct MethodSummary {
  MethodSpec spec;
  double mean_fnp = 0.0, sd_fnp = 0.0;
  double mean_fdp = 0.0, sd_fdp = 0.0;
  double mean_fm = 0.0, sd_fm = 0.0;
  std::size_t refusals = 0;
};

struct ReplicationSummary {
  std::size_t m = 0;
  std::size_t s_true = 0;
  std::vector<MethodSummary> methods;
  std::vector<ReplicationRecord> records;  // rep index order, worker-count invariant
};

// Runs the configured replications: per rep, draw the signal set, draw
// z ~ N(mu, Sigma), form p-values, apply every method, classify, record.
// Replication r uses substream (seed, r); records land in slot r, so the
// serial and parallel policies produce identical summaries.
ReplicationSummary run_experiment(const ExperimentConfig& config,
                                  ExecutionPolicy policy = ExecutionPolicy::parallel);

// Deterministic pairwise summation helpers used for the aggregates.
double pairwise_mean(const std::vector<double>& values);
double pairwise_sd(const std::vector<double>& values, double mean);

}  // namespace fnc
