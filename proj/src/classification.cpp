#include "fnc/classification.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fnc {

ClassificationCounts classify(std::span<const std::size_t> selected,
                              const GroundTruth& truth, std::size_t m) {
  truth.validate(m);
  std::vector<bool> picked(m, false);
  for (const std::size_t index : selected) {
    if (index >= m) {
      throw std::domain_error("classify: selected index " + std::to_string(index) +
                              " out of range");
    }
    if (picked[index]) {
      throw std::domain_error("classify: duplicate selected index " + std::to_string(index));
    }
    picked[index] = true;
  }
  ClassificationCounts counts;
  for (const std::size_t index : truth.signal_indices) {
    if (picked[index]) {
      ++counts.tp;
    } else {
      ++counts.fn;
    }
  }
  counts.fp = selected.size() - counts.tp;
  counts.tn = (m - truth.s()) - counts.fp;
  return counts;
}

Metrics compute_metrics(const ClassificationCounts& counts) {
  const std::size_t s = counts.s();
  if (s == 0) {
    throw std::domain_error("compute_metrics: FNP undefined when s = 0");
  }
  Metrics metrics;
  metrics.fnp = static_cast<double>(counts.fn) / static_cast<double>(s);
  metrics.fdp = counts.r() == 0
                    ? 0.0
                    : static_cast<double>(counts.fp) / static_cast<double>(counts.r());
  metrics.fm_index = std::sqrt((1.0 - metrics.fnp) * (1.0 - metrics.fdp));
  return metrics;
}

}  // namespace fnc
