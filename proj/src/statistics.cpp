#include "fnc/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "fnc/normal.hpp"

namespace fnc {

std::string to_string(Scale scale) {
  switch (scale) {
    case Scale::raw: return "raw";
    case Scale::z: return "z";
    case Scale::p: return "p";
  }
  return "?";
}

std::string to_string(Sidedness sidedness) {
  return sidedness == Sidedness::one_sided ? "one" : "two";
}

Scale scale_from_string(const std::string& text) {
  if (text == "raw") return Scale::raw;
  if (text == "z") return Scale::z;
  if (text == "p") return Scale::p;
  throw std::invalid_argument("unknown scale: " + text);
}

Sidedness sidedness_from_string(const std::string& text) {
  if (text == "one" || text == "one_sided") return Sidedness::one_sided;
  if (text == "two" || text == "two_sided") return Sidedness::two_sided;
  throw std::invalid_argument("unknown sidedness: " + text);
}

void StatisticVector::validate() const {
  if (values.size() < 2) {
    throw std::invalid_argument("StatisticVector: need at least 2 values");
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) {
      throw std::invalid_argument("StatisticVector: non-finite value at index " +
                                  std::to_string(j));
    }
    if (scale == Scale::p && !(values[j] > 0.0 && values[j] <= 1.0)) {
      throw std::invalid_argument("StatisticVector: p-value outside (0,1] at index " +
                                  std::to_string(j));
    }
  }
  if (!ids.empty()) {
    if (ids.size() != values.size()) {
      throw std::invalid_argument("StatisticVector: ids length mismatch");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
      if (!seen.insert(id).second) {
        throw std::invalid_argument("StatisticVector: duplicate id '" + id + "'");
      }
    }
  }
}

void GroundTruth::validate(std::size_t m) const {
  if (signal_indices.empty() || signal_indices.size() >= m) {
    throw std::invalid_argument("GroundTruth: need 0 < s < m");
  }
  for (std::size_t i = 0; i < signal_indices.size(); ++i) {
    if (signal_indices[i] >= m) {
      throw std::invalid_argument("GroundTruth: index out of range");
    }
    if (i > 0 && signal_indices[i] <= signal_indices[i - 1]) {
      throw std::invalid_argument("GroundTruth: indices must be sorted and unique");
    }
  }
}

bool GroundTruth::contains(std::size_t index) const {
  return std::binary_search(signal_indices.begin(), signal_indices.end(), index);
}

GroundTruth GroundTruth::sample(std::size_t m, std::size_t s, Rng& rng) {
  GroundTruth truth;
  truth.signal_indices = rng.sample_indices(m, s);
  truth.validate(m);
  return truth;
}

StatisticVector inverse_normal_transform(const StatisticVector& raw,
                                         const std::function<double(double)>& null_cdf) {
  raw.validate();
  if (raw.scale != Scale::raw) {
    throw std::invalid_argument("inverse_normal_transform: input must be raw scale");
  }
  StatisticVector out;
  out.scale = Scale::z;
  out.sidedness = raw.sidedness;
  out.ids = raw.ids;
  out.values.reserve(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double u = null_cdf(raw.values[j]);
    if (!(u > 0.0 && u < 1.0)) {
      throw std::domain_error("inverse_normal_transform: null CDF saturated at index " +
                              std::to_string(j));
    }
    out.values.push_back(normal_quantile(u));
  }
  return out;
}

StatisticVector z_to_pvalue(const StatisticVector& z, TransformDiagnostics* diagnostics) {
  z.validate();
  if (z.scale != Scale::z) {
    throw std::invalid_argument("z_to_pvalue: input must be z scale");
  }
  StatisticVector out;
  out.scale = Scale::p;
  out.sidedness = z.sidedness;
  out.ids = z.ids;
  out.values.reserve(z.size());
  std::size_t clamped = 0;
  for (const double value : z.values) {
    double p = (z.sidedness == Sidedness::one_sided)
                   ? normal_tail(value)
                   : 2.0 * normal_tail(std::fabs(value));
    if (p < kPValueFloor) {
      p = kPValueFloor;
      ++clamped;
    }
    if (p > 1.0) p = 1.0;
    out.values.push_back(p);
  }
  if (diagnostics) diagnostics->clamped_low += clamped;
  return out;
}

std::vector<std::size_t> rank_ascending(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return a < b;
  });
  return order;
}

}  // namespace fnc
