#include "fnc/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fnc/normal.hpp"

namespace fnc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// z magnitude corresponding to a p-value under the vector's sidedness.
double z_from_p(double p, Sidedness sidedness) {
  const double tail = (sidedness == Sidedness::two_sided) ? p / 2.0 : p;
  if (tail >= 1.0) return (sidedness == Sidedness::two_sided) ? 0.0 : -kInf;
  return -normal_quantile(tail);
}

// Midpoint threshold between ranks k and k+1 on the (|z|) scale.
double midpoint_threshold(const std::vector<double>& sorted_p, std::size_t k,
                          Sidedness sidedness) {
  const std::size_t m = sorted_p.size();
  if (k == 0) return kInf;
  if (k >= m) return -kInf;
  const double upper = z_from_p(sorted_p[k - 1], sidedness);
  const double lower = z_from_p(sorted_p[k], sidedness);
  if (!std::isfinite(upper) || !std::isfinite(lower)) return lower;
  return 0.5 * (upper + lower);
}

struct Ranked {
  std::vector<std::size_t> order;  // original index per rank
  std::vector<double> sorted_p;
};

Ranked rank_pvalues(const StatisticVector& pvalues) {
  pvalues.validate();
  if (pvalues.scale != Scale::p) {
    throw std::invalid_argument("screening: input must be on the p scale");
  }
  Ranked ranked;
  ranked.order = rank_ascending(pvalues.values);
  ranked.sorted_p.reserve(ranked.order.size());
  for (const std::size_t index : ranked.order) {
    ranked.sorted_p.push_back(pvalues.values[index]);
  }
  return ranked;
}

std::vector<std::size_t> top_k(const Ranked& ranked, std::size_t k) {
  std::vector<std::size_t> selected(ranked.order.begin(), ranked.order.begin() + k);
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace

std::string to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::fnc: return "fnc";
    case SelectionMethod::bh: return "bh";
    case SelectionMethod::bonferroni: return "bonferroni";
  }
  return "?";
}

double fnp_hat(std::size_t rank, double p_at_rank, std::size_t s, std::size_t m) {
  if (s == 0 || s >= m) {
    throw std::domain_error("fnp_hat: need 1 <= s < m");
  }
  if (rank > m) {
    throw std::domain_error("fnp_hat: rank exceeds m");
  }
  if (rank == 0) return 1.0;
  const double s_real = static_cast<double>(s);
  const double value = 1.0 - static_cast<double>(rank) / s_real +
                       static_cast<double>(m - s) * p_at_rank / s_real;
  return std::max(value, 0.0);
}

SelectionResult fnc_screen(const StatisticVector& pvalues, std::size_t s, double beta,
                           SignalCountSource s_source) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::domain_error("fnc_screen: beta must lie in (0, 1)");
  }
  const Ranked ranked = rank_pvalues(pvalues);
  const std::size_t m = ranked.sorted_p.size();
  SelectionResult result;
  result.method = SelectionMethod::fnc;
  result.level = beta;
  result.s_source = s_source;
  if (s >= m) {
    if (s_source == SignalCountSource::estimated) {
      s = m - 1;  // the estimator overshot; the FNP formula needs s < m
      result.s_clipped = true;
    } else {
      throw std::domain_error("fnc_screen: known s must satisfy s < m");
    }
  }
  if (s == 0) {
    throw std::domain_error("fnc_screen: s must be positive");
  }
  result.s_used = s;

  // First rank whose estimated FNP dips below beta; rank m always qualifies
  // in the worst case, so the scan terminates.
  std::size_t k = 0;
  double fnp_at_k = 1.0;
  for (std::size_t j = 0; j <= m; ++j) {
    const double value = (j == 0) ? 1.0 : fnp_hat(j, ranked.sorted_p[j - 1], s, m);
    if (value < beta) {
      k = j;
      fnp_at_k = value;
      break;
    }
  }
  result.k = k;
  result.threshold_rank = k;
  result.fnp_hat_at_k = fnp_at_k;
  result.threshold_z = midpoint_threshold(ranked.sorted_p, k, pvalues.sidedness);
  result.selected = top_k(ranked, k);
  return result;
}

SelectionResult bh_screen(const StatisticVector& pvalues, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("bh_screen: alpha must lie in (0, 1)");
  }
  const Ranked ranked = rank_pvalues(pvalues);
  const std::size_t m = ranked.sorted_p.size();
  std::size_t k = 0;
  for (std::size_t i = m; i >= 1; --i) {
    if (ranked.sorted_p[i - 1] <=
        alpha * static_cast<double>(i) / static_cast<double>(m)) {
      k = i;
      break;
    }
  }
  SelectionResult result;
  result.method = SelectionMethod::bh;
  result.level = alpha;
  result.k = k;
  result.threshold_rank = k;
  result.threshold_z = midpoint_threshold(ranked.sorted_p, k, pvalues.sidedness);
  result.selected = top_k(ranked, k);
  return result;
}

SelectionResult bonferroni_screen(const StatisticVector& pvalues, double alpha,
                                  std::size_t m_eff) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("bonferroni_screen: alpha must lie in (0, 1)");
  }
  if (m_eff < 1) {
    throw std::domain_error("bonferroni_screen: m_eff must be >= 1");
  }
  const Ranked ranked = rank_pvalues(pvalues);
  const double cutoff = alpha / static_cast<double>(m_eff);
  std::size_t k = 0;
  while (k < ranked.sorted_p.size() && ranked.sorted_p[k] <= cutoff) ++k;
  SelectionResult result;
  result.method = SelectionMethod::bonferroni;
  result.level = alpha;
  result.k = k;
  result.threshold_rank = k;
  result.threshold_z = midpoint_threshold(ranked.sorted_p, k, pvalues.sidedness);
  result.selected = top_k(ranked, k);
  return result;
}

}  // namespace fnc
