#pragma once

#include <cstddef>
#include <span>

#include "fnc/statistics.hpp"

namespace fnc {

// Confusion counts of a selection rule against the ground truth.
struct ClassificationCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t r() const { return tp + fp; }
  std::size_t s() const { return tp + fn; }
  std::size_t m() const { return tp + fp + fn + tn; }
};

struct Metrics {
  double fnp = 0.0;
  double fdp = 0.0;
  double fm_index = 0.0;
};

// Exact set accounting; selected entries must be distinct and < m.
ClassificationCounts classify(std::span<const std::size_t> selected,
                              const GroundTruth& truth, std::size_t m);

// fnp = fn/s, fdp = fp/r (0 when nothing is selected),
// fm = sqrt((1-fnp)(1-fdp)). Throws std::domain_error when s = 0.
Metrics compute_metrics(const ClassificationCounts& counts);

}  // namespace fnc
