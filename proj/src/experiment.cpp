#include "fnc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fnc/proportion.hpp"

namespace fnc {

namespace {

double pairwise_sum(const double* values, std::size_t n) {
  if (n <= 8) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[i];
    return sum;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

}  // namespace

double pairwise_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values.data(), values.size()) / static_cast<double>(values.size());
}

double pairwise_sd(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  std::vector<double> squares(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    squares[i] = d * d;
  }
  return std::sqrt(pairwise_sum(squares.data(), squares.size()) /
                   static_cast<double>(values.size() - 1));
}

std::size_t SparsitySpec::signal_count(std::size_t m) const {
  const double raw = std::pow(static_cast<double>(m), 1.0 - gamma);
  const auto s = static_cast<std::size_t>(std::llround(raw));
  return s < 1 ? 1 : s;
}

void SparsitySpec::validate(std::size_t m) const {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("sparsity: gamma must lie in (0, 1)");
  }
  const std::size_t s = signal_count(m);
  if (s >= m) throw std::invalid_argument("sparsity: s must be < m");
  if (!per_signal.empty() && per_signal.size() != s) {
    throw std::invalid_argument("sparsity: per-signal intensities must have length s = " +
                                std::to_string(s));
  }
  if (per_signal.empty() && !(intensity >= 0.0)) {
    throw std::invalid_argument("sparsity: intensity must be nonnegative");
  }
}

std::string MethodSpec::label() const {
  std::ostringstream out;
  out << to_string(method) << "(" << level;
  if (method == SelectionMethod::fnc) {
    out << (s_source == SignalCountSource::known ? ",known" : ",estimated");
  }
  if (method == SelectionMethod::bonferroni && m_eff != 0) {
    out << ",m_eff=" << m_eff;
  }
  out << ")";
  return out.str();
}

void ExperimentConfig::validate() const {
  if (m < 3) throw std::invalid_argument("experiment: m must be >= 3");
  if (model.m != m) throw std::invalid_argument("experiment: model dimension != m");
  model.validate();
  sparsity.validate(m);
  if (methods.empty()) throw std::invalid_argument("experiment: no methods configured");
  if (n_reps < 1) throw std::invalid_argument("experiment: n_reps must be >= 1");
  for (const auto& spec : methods) {
    if (!(spec.level > 0.0 && spec.level < 1.0)) {
      throw std::invalid_argument("experiment: nominal level must lie in (0, 1)");
    }
    if (spec.method == SelectionMethod::fnc &&
        spec.s_source == SignalCountSource::estimated && !bounds) {
      throw std::invalid_argument(
          "experiment: method '" + spec.label() +
          "' needs bounding sequences; calibrate first or supply bounds");
    }
  }
  if (bounds && bounds->m != m) {
    throw std::invalid_argument("experiment: bounds calibrated for different m");
  }
}

ReplicationSummary run_experiment(const ExperimentConfig& config, ExecutionPolicy policy) {
  config.validate();
  const CovarianceSampler sampler(config.model);
  const std::size_t m = config.m;
  const std::size_t s = config.sparsity.signal_count(m);

  ReplicationSummary summary;
  summary.m = m;
  summary.s_true = s;
  summary.records.assign(config.n_reps, ReplicationRecord{});

  const bool any_estimated =
      std::any_of(config.methods.begin(), config.methods.end(), [](const MethodSpec& spec) {
        return spec.method == SelectionMethod::fnc &&
               spec.s_source == SignalCountSource::estimated;
      });

  for_each_index(policy, config.n_reps, [&](std::size_t rep) {
    Rng rng(config.seed, rep);
    const GroundTruth truth = GroundTruth::sample(m, s, rng);
    std::vector<double> mu(m, 0.0);
    for (std::size_t i = 0; i < truth.signal_indices.size(); ++i) {
      mu[truth.signal_indices[i]] =
          config.sparsity.per_signal.empty() ? config.sparsity.intensity
                                             : config.sparsity.per_signal[i];
    }
    StatisticVector z;
    z.scale = Scale::z;
    z.sidedness = config.sidedness;
    z.values.resize(m);
    sampler.sample(rng, mu, z.values);
    const StatisticVector pvalues = z_to_pvalue(z);

    ProportionEstimate proportion;
    if (any_estimated) {
      std::vector<double> sorted = pvalues.values;
      std::sort(sorted.begin(), sorted.end());
      proportion = estimate_proportion(sorted, *config.bounds);
    }

    ReplicationRecord& record = summary.records[rep];
    record.rep = rep;
    record.per_method.resize(config.methods.size());
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const MethodSpec& spec = config.methods[mi];
      MethodRepRecord& out = record.per_method[mi];
      SelectionResult selection;
      switch (spec.method) {
        case SelectionMethod::fnc:
          if (spec.s_source == SignalCountSource::known) {
            selection = fnc_screen(pvalues, s, spec.level, SignalCountSource::known);
          } else {
            out.pi_hat = proportion.pi_hat;
            if (!proportion.detectable()) {
              // no detectable signal: refuse instead of dividing by zero
              out.refused = true;
              out.k = 0;
              out.metrics = compute_metrics(classify({}, truth, m));
              continue;
            }
            selection = fnc_screen(pvalues, proportion.s_hat, spec.level,
                                   SignalCountSource::estimated);
          }
          break;
        case SelectionMethod::bh:
          selection = bh_screen(pvalues, spec.level);
          break;
        case SelectionMethod::bonferroni:
          selection = bonferroni_screen(pvalues, spec.level,
                                        spec.m_eff == 0 ? m : spec.m_eff);
          break;
      }
      out.k = selection.k;
      out.s_used = selection.s_used;
      out.metrics = compute_metrics(classify(selection.selected, truth, m));
    }
  });

  // Aggregate serially in rep order; worker count cannot change the result.
  summary.methods.resize(config.methods.size());
  std::vector<double> fnp(config.n_reps), fdp(config.n_reps), fm(config.n_reps);
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    MethodSummary& method_summary = summary.methods[mi];
    method_summary.spec = config.methods[mi];
    for (std::size_t rep = 0; rep < config.n_reps; ++rep) {
      const MethodRepRecord& record = summary.records[rep].per_method[mi];
      fnp[rep] = record.metrics.fnp;
      fdp[rep] = record.metrics.fdp;
      fm[rep] = record.metrics.fm_index;
      if (record.refused) ++method_summary.refusals;
    }
    method_summary.mean_fnp = pairwise_mean(fnp);
    method_summary.sd_fnp = pairwise_sd(fnp, method_summary.mean_fnp);
    method_summary.mean_fdp = pairwise_mean(fdp);
    method_summary.sd_fdp = pairwise_sd(fdp, method_summary.mean_fdp);
    method_summary.mean_fm = pairwise_mean(fm);
    method_summary.sd_fm = pairwise_sd(fm, method_summary.mean_fm);
  }
  return summary;
}

}  // namespace fnc
