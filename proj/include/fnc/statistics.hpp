#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fnc/rng.hpp"

namespace fnc {

enum class Scale { raw, z, p };
enum class Sidedness { one_sided, two_sided };

std::string to_string(Scale scale);
std::string to_string(Sidedness sidedness);
Scale scale_from_string(const std::string& text);
Sidedness sidedness_from_string(const std::string& text);

// Observed test statistics plus the metadata needed to move between the
// raw, z and p scales. ids are optional; when present they must be unique
// and as long as values.
struct StatisticVector {
  std::vector<double> values;
  Scale scale = Scale::z;
  Sidedness sidedness = Sidedness::one_sided;
  std::vector<std::string> ids;

  std::size_t size() const { return values.size(); }

  // Enforces the invariants (length >= 2, finite values, p in (0,1],
  // unique ids). Throws std::invalid_argument on violation.
  void validate() const;
};

// Index set of the true signal variables.
struct GroundTruth {
  std::vector<std::size_t> signal_indices;  // sorted, unique

  std::size_t s() const { return signal_indices.size(); }
  void validate(std::size_t m) const;
  bool contains(std::size_t index) const;

  // Uniform draw of s distinct indices from [0, m).
  static GroundTruth sample(std::size_t m, std::size_t s, Rng& rng);
};

struct TransformDiagnostics {
  std::size_t clamped_low = 0;  // p-values pushed up to the 1e-300 floor
};

inline constexpr double kPValueFloor = 1e-300;

// z_j = Phi^{-1}(F0(x_j)) for a known, strictly increasing null CDF.
// Throws std::domain_error naming the first index where F0 saturates at
// exactly 0 or 1.
StatisticVector inverse_normal_transform(const StatisticVector& raw,
                                         const std::function<double(double)>& null_cdf);

// One-sided: p = Phi_bar(z). Two-sided: p = 2 Phi_bar(|z|). Results are
// clamped to [1e-300, 1]; clamp events are reported via diagnostics.
StatisticVector z_to_pvalue(const StatisticVector& z,
                            TransformDiagnostics* diagnostics = nullptr);

// Ranks values ascending; ties broken by ascending original index so that
// ranking is reproducible across runs and platforms. Returns the original
// indices in rank order.
std::vector<std::size_t> rank_ascending(const std::vector<double>& values);

}  // namespace fnc
