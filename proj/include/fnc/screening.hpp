#pragma once

#include <cstddef>
#include <vector>

#include "fnc/statistics.hpp"

namespace fnc {

enum class SelectionMethod { fnc, bh, bonferroni };
enum class SignalCountSource { known, estimated };

std::string to_string(SelectionMethod method);

struct SelectionResult {
  std::vector<std::size_t> selected;  // original indices, ascending
  std::size_t k = 0;                  // |selected|
  std::size_t threshold_rank = 0;     // == k
  double threshold_z = 0.0;           // z-scale midpoint between ranks k and k+1;
                                      // +inf at k = 0, -inf at k = m
  double fnp_hat_at_k = 0.0;          // FNC only; 0 for the baselines
  double level = 0.0;                 // beta (FNC) or alpha (baselines)
  std::size_t s_used = 0;             // FNC only
  SignalCountSource s_source = SignalCountSource::known;
  SelectionMethod method = SelectionMethod::fnc;
  bool s_clipped = false;             // estimated s was >= m and got clipped to m-1
};

// Estimated FNP after selecting the top j of m ranked p-values with s true
// signals: max{1 - j/s + (m-s) p_at_rank / s, 0}. Rank 0 (select nothing)
// returns 1. For two-sided analyses the statistics must carry two-sided
// p-values; the doubling happens there, never here as well.
double fnp_hat(std::size_t rank, double p_at_rank, std::size_t s, std::size_t m);

// FNC screening: ranks p ascending (ties by original index) and selects the
// top k, where k is the smallest rank with fnp_hat below beta. Such a k
// always exists (fnp_hat at rank m with p = 1 is 0).
SelectionResult fnc_screen(const StatisticVector& pvalues, std::size_t s, double beta,
                           SignalCountSource s_source = SignalCountSource::known);

// Benjamini-Hochberg step-up at level alpha.
SelectionResult bh_screen(const StatisticVector& pvalues, double alpha);

// Bonferroni at level alpha / m_eff.
SelectionResult bonferroni_screen(const StatisticVector& pvalues, double alpha,
                                  std::size_t m_eff);

}  // namespace fnc
