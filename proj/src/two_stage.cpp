#include "fnc/two_stage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fnc/classification.hpp"
#include "fnc/experiment.hpp"
#include "fnc/proportion.hpp"

namespace fnc {

void TwoStageConfig::validate() const {
  if (m < 3) throw std::invalid_argument("two_stage: m must be >= 3");
  truth.validate(m);
  if (effect.size() != m) {
    throw std::invalid_argument("two_stage: effect vector must have length m");
  }
  for (std::size_t j = 0; j < m; ++j) {
    const bool is_signal = truth.contains(j);
    if (!is_signal && effect[j] != 0.0) {
      throw std::invalid_argument("two_stage: nonzero effect off the signal set at index " +
                                  std::to_string(j));
    }
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("two_stage: split_fraction must lie in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("two_stage: alpha and beta must lie in (0, 1)");
  }
  if (!(n_total > 0.0) || !(n_ref > 0.0)) {
    throw std::invalid_argument("two_stage: sample sizes must be positive");
  }
  if (n_reps < 1) throw std::invalid_argument("two_stage: n_reps must be >= 1");
  if (model) {
    if (model->m != m) throw std::invalid_argument("two_stage: model dimension != m");
    model->validate();
  }
  if (s_source == SignalCountSource::estimated) {
    if (!stage1_bounds) {
      throw std::invalid_argument(
          "two_stage: estimated s needs stage-1 bounding sequences");
    }
    if (stage1_bounds->m != m) {
      throw std::invalid_argument("two_stage: bounds calibrated for different m");
    }
  }
}

std::pair<StatisticVector, StatisticVector> simulate_split_statistics(
    const TwoStageConfig& config, const CovarianceSampler* sampler, Rng& rng) {
  const std::size_t m = config.m;
  const double n1 = config.split_fraction * config.n_total;
  const double n2 = (1.0 - config.split_fraction) * config.n_total;
  const double scale1 = std::sqrt(n1 / config.n_ref);
  const double scale2 = std::sqrt(n2 / config.n_ref);

  StatisticVector stage1, stage2;
  stage1.scale = stage2.scale = Scale::z;
  stage1.sidedness = stage2.sidedness = config.sidedness;
  stage1.values.resize(m);
  stage2.values.resize(m);

  auto draw_noise = [&](std::vector<double>& out) {
    if (sampler) {
      sampler->sample(rng, out);
    } else {
      for (auto& x : out) x = rng.normal();
    }
  };
  draw_noise(stage1.values);
  draw_noise(stage2.values);
  for (std::size_t j = 0; j < m; ++j) {
    stage1.values[j] += config.effect[j] * scale1;
    stage2.values[j] += config.effect[j] * scale2;
  }
  return {std::move(stage1), std::move(stage2)};
}

TwoStageResult run_two_stage(const TwoStageConfig& config, ExecutionPolicy policy) {
  config.validate();
  std::optional<CovarianceSampler> sampler;
  if (config.model) sampler.emplace(*config.model);

  const std::size_t m = config.m;
  const std::size_t m_eff = config.m_eff == 0 ? m : config.m_eff;
  const double w1 = config.split_fraction;

  std::vector<bool> is_null(m, true);
  std::size_t n_true = 0;
  for (const std::size_t j : config.truth.signal_indices) {
    if (config.effect[j] != 0.0) {
      is_null[j] = false;
      ++n_true;
    }
  }

  TwoStageResult result;
  result.records.assign(config.n_reps, TwoStageRepRecord{});

  for_each_index(policy, config.n_reps, [&](std::size_t rep) {
    Rng rng(config.seed, rep);
    auto [stage1_z, stage2_z] =
        simulate_split_statistics(config, sampler ? &*sampler : nullptr, rng);
    const StatisticVector stage1_p = z_to_pvalue(stage1_z);
    const StatisticVector stage2_p = z_to_pvalue(stage2_z);

    TwoStageRepRecord& record = result.records[rep];
    record.rep = rep;

    // Stage 1: FNC screening, with s estimated from the stage-1 p-values
    // unless the caller runs in known-s mode.
    std::size_t s_for_screening = 0;
    bool refused = false;
    if (config.s_source == SignalCountSource::estimated) {
      std::vector<double> sorted = stage1_p.values;
      std::sort(sorted.begin(), sorted.end());
      const ProportionEstimate estimate = estimate_proportion(sorted, *config.stage1_bounds);
      record.pi_hat = estimate.pi_hat;
      record.s_hat = estimate.s_hat;
      if (!estimate.detectable()) {
        refused = true;
      } else {
        s_for_screening = estimate.s_hat;
      }
    } else {
      s_for_screening = config.truth.s();
      record.s_hat = s_for_screening;
    }
    if (!refused) {
      const SelectionResult stage1 =
          fnc_screen(stage1_p, s_for_screening, config.beta, config.s_source);
      record.stage1_selected = stage1.selected;
    }
    record.refused = refused;

    // Stage 2: Bonferroni over the survivors only, on the independent
    // stage-2 statistics.
    if (!record.stage1_selected.empty()) {
      const double cutoff =
          config.alpha / static_cast<double>(record.stage1_selected.size());
      record.stage2_pvalues.reserve(record.stage1_selected.size());
      for (const std::size_t j : record.stage1_selected) {
        record.stage2_pvalues.push_back(stage2_p.values[j]);
        if (stage2_p.values[j] <= cutoff) {
          record.stage2_significant.push_back(j);
        }
      }
    }

    // One-stage baseline: Bonferroni on the pooled meta-analysis
    // z = sqrt(w1) z1 + sqrt(1-w1) z2, which has unit variance and mean
    // A_j sqrt(n_total / n_ref).
    StatisticVector pooled;
    pooled.scale = Scale::z;
    pooled.sidedness = config.sidedness;
    pooled.values.resize(m);
    const double a1 = std::sqrt(w1);
    const double a2 = std::sqrt(1.0 - w1);
    for (std::size_t j = 0; j < m; ++j) {
      pooled.values[j] = a1 * stage1_z.values[j] + a2 * stage2_z.values[j];
    }
    const StatisticVector pooled_p = z_to_pvalue(pooled);
    const SelectionResult one_stage = bonferroni_screen(pooled_p, config.alpha, m_eff);
    record.one_stage_significant = one_stage.selected;
  });

  // Aggregates, serial over rep order.
  std::size_t fwer2_hits = 0, fwer1_hits = 0;
  double power2_sum = 0.0, power1_sum = 0.0;
  double stage1_sum = 0.0, stage2_sum = 0.0;
  for (const TwoStageRepRecord& record : result.records) {
    auto count_split = [&](const std::vector<std::size_t>& selected, bool& any_null,
                           std::size_t& true_hits) {
      any_null = false;
      true_hits = 0;
      for (const std::size_t j : selected) {
        if (is_null[j]) {
          any_null = true;
        } else {
          ++true_hits;
        }
      }
    };
    bool any_null = false;
    std::size_t true_hits = 0;
    count_split(record.stage2_significant, any_null, true_hits);
    if (any_null) ++fwer2_hits;
    if (n_true > 0) {
      power2_sum += static_cast<double>(true_hits) / static_cast<double>(n_true);
    }
    count_split(record.one_stage_significant, any_null, true_hits);
    if (any_null) ++fwer1_hits;
    if (n_true > 0) {
      power1_sum += static_cast<double>(true_hits) / static_cast<double>(n_true);
    }
    stage1_sum += static_cast<double>(record.stage1_selected.size());
    stage2_sum += static_cast<double>(record.stage2_significant.size());
    if (record.refused) ++result.refusals;
  }
  const double reps = static_cast<double>(config.n_reps);
  result.fwer_two_stage = static_cast<double>(fwer2_hits) / reps;
  result.fwer_one_stage = static_cast<double>(fwer1_hits) / reps;
  result.power_two_stage = power2_sum / reps;
  result.power_one_stage = power1_sum / reps;
  result.mean_stage1_count = stage1_sum / reps;
  result.mean_stage2_count = stage2_sum / reps;
  return result;
}

}  // namespace fnc
