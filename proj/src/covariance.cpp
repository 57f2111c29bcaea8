#include "fnc/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fnc {

namespace {

std::string format_double(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

// Lower Cholesky factor of the k x k equicorrelated matrix (unit diagonal,
// off-diagonal r), computed densely; k stays small for the block kinds.
std::vector<double> equicorrelated_chol(std::size_t k, double r) {
  std::vector<double> matrix(k * k, r);
  for (std::size_t i = 0; i < k; ++i) matrix[i * k + i] = 1.0;
  return cholesky_lower(matrix, k);
}

}  // namespace

std::vector<double> cholesky_lower(const std::vector<double>& matrix, std::size_t n) {
  if (matrix.size() != n * n) {
    throw std::invalid_argument("cholesky_lower: size mismatch");
  }
  std::vector<double> lower(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = matrix[i * n + j];
      for (std::size_t t = 0; t < j; ++t) sum -= lower[i * n + t] * lower[j * n + t];
      if (i == j) {
        if (sum <= 0.0) {
          throw DecompositionError("cholesky: matrix not positive definite at pivot " +
                                   std::to_string(i));
        }
        lower[i * n + i] = std::sqrt(sum);
      } else {
        lower[i * n + j] = sum / lower[j * n + j];
      }
    }
  }
  return lower;
}

std::vector<std::size_t> random_block_sizes(const RandomBlocksModel& blocks, std::size_t m) {
  if (blocks.n_blocks == 0 || blocks.size_min == 0 || blocks.size_min > blocks.size_max) {
    throw std::invalid_argument("random_blocks: bad size range");
  }
  if (blocks.n_blocks > m) {
    throw std::invalid_argument("random_blocks: m too small for n_blocks");
  }
  Rng rng(blocks.seed, 0x626c6f636bULL);
  std::vector<std::size_t> raw(blocks.n_blocks);
  std::size_t total = 0;
  for (auto& size : raw) {
    size = blocks.size_min + static_cast<std::size_t>(
                                 rng.below(blocks.size_max - blocks.size_min + 1));
    total += size;
  }
  // Rescale to sum to m; the last block absorbs the rounding remainder.
  std::vector<std::size_t> sizes;
  sizes.reserve(blocks.n_blocks);
  std::size_t used = 0;
  for (std::size_t b = 0; b + 1 < blocks.n_blocks; ++b) {
    const double share = static_cast<double>(raw[b]) * static_cast<double>(m) /
                         static_cast<double>(total);
    std::size_t size = static_cast<std::size_t>(std::llround(share));
    if (size == 0) size = 1;
    if (used + size + (blocks.n_blocks - 1 - b) > m) {
      size = m - used - (blocks.n_blocks - 1 - b);  // leave room, one each
      if (size == 0) size = 1;
    }
    sizes.push_back(size);
    used += size;
  }
  if (used >= m) {
    throw std::invalid_argument("random_blocks: m too small for n_blocks");
  }
  sizes.push_back(m - used);
  return sizes;
}

void CovarianceModel::validate() const {
  if (m < 2) throw std::invalid_argument("CovarianceModel: m must be >= 2");
  if (const auto* ar = std::get_if<ArModel>(&kind)) {
    if (!(ar->lambda > -1.0 && ar->lambda < 1.0)) {
      throw std::invalid_argument("ar: lambda must lie in (-1, 1)");
    }
  } else if (const auto* block = std::get_if<BlockModel>(&kind)) {
    const std::size_t k = block->block_size;
    if (k < 1 || m % k != 0) {
      throw std::invalid_argument("block: block size must divide m");
    }
    if (k > 1 && !(block->r > -1.0 / static_cast<double>(k - 1) && block->r < 1.0)) {
      throw std::invalid_argument("block: r outside (-1/(k-1), 1)");
    }
  } else if (const auto* rb = std::get_if<RandomBlocksModel>(&kind)) {
    random_block_sizes(*rb, m);  // throws when inconsistent
    if (!(rb->r > -1.0 / static_cast<double>(m) && rb->r < 1.0)) {
      throw std::invalid_argument("random_blocks: r outside unit range");
    }
  } else if (const auto* factor = std::get_if<FactorModel>(&kind)) {
    if (!(factor->tau > 0.0 && factor->tau < 1.0)) {
      throw std::invalid_argument("factor: tau must lie in (0, 1)");
    }
  } else if (const auto* ex = std::get_if<ExplicitModel>(&kind)) {
    if (ex->matrix.size() != m * m) {
      throw std::invalid_argument("explicit: matrix must be m x m");
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (std::fabs(ex->matrix[i * m + i] - 1.0) > 1e-12) {
        throw std::invalid_argument("explicit: diagonal must be 1");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (std::fabs(ex->matrix[i * m + j] - ex->matrix[j * m + i]) > 1e-12) {
          throw std::invalid_argument("explicit: matrix must be symmetric");
        }
      }
    }
  }
}

std::string CovarianceModel::describe() const {
  if (const auto* ar = std::get_if<ArModel>(&kind)) {
    return "ar:" + format_double(ar->lambda);
  }
  if (const auto* block = std::get_if<BlockModel>(&kind)) {
    return "block:" + std::to_string(block->block_size) + ":" + format_double(block->r);
  }
  if (const auto* rb = std::get_if<RandomBlocksModel>(&kind)) {
    return "randblocks:" + std::to_string(rb->n_blocks) + ":" + std::to_string(rb->size_min) +
           ":" + std::to_string(rb->size_max) + ":" + format_double(rb->r) + ":" +
           std::to_string(rb->seed);
  }
  if (const auto* factor = std::get_if<FactorModel>(&kind)) {
    return "factor:" + format_double(factor->tau) + ":" + std::to_string(factor->h_seed);
  }
  return "explicit";
}

CovarianceSampler::CovarianceSampler(const CovarianceModel& model)
    : model_(model), m_(model.m) {
  model_.validate();
  if (std::get_if<ArModel>(&model_.kind)) {
    blocks_.emplace_back(0, m_);
    return;
  }
  if (const auto* block = std::get_if<BlockModel>(&model_.kind)) {
    const std::size_t k = block->block_size;
    block_chol_.push_back(equicorrelated_chol(k, block->r));
    for (std::size_t offset = 0; offset < m_; offset += k) {
      blocks_.emplace_back(offset, k);
      block_chol_index_.push_back(0);
    }
  } else if (const auto* rb = std::get_if<RandomBlocksModel>(&model_.kind)) {
    const auto sizes = random_block_sizes(*rb, m_);
    std::size_t offset = 0;
    for (const std::size_t size : sizes) {
      blocks_.emplace_back(offset, size);
      offset += size;
    }
    // one factor per distinct block size
    std::vector<std::size_t> distinct;
    for (const auto& [off, size] : blocks_) {
      (void)off;
      auto it = std::find(distinct.begin(), distinct.end(), size);
      if (it == distinct.end()) {
        distinct.push_back(size);
        block_chol_.push_back(equicorrelated_chol(size, rb->r));
        block_chol_index_.push_back(distinct.size() - 1);
      } else {
        block_chol_index_.push_back(static_cast<std::size_t>(it - distinct.begin()));
      }
    }
  } else if (const auto* factor = std::get_if<FactorModel>(&model_.kind)) {
    Rng rng(factor->h_seed, 0x68ULL);
    factor_h_.resize(m_);
    factor_scale_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      factor_h_[i] = rng.normal();
      factor_scale_[i] = 1.0 / std::sqrt(1.0 + factor->tau * factor_h_[i] * factor_h_[i]);
    }
    blocks_.emplace_back(0, m_);
  } else if (const auto* ex = std::get_if<ExplicitModel>(&model_.kind)) {
    explicit_chol_ = cholesky_lower(ex->matrix, m_);
    blocks_.emplace_back(0, m_);
  }
  block_of_.resize(m_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (std::size_t i = 0; i < blocks_[b].second; ++i) {
      block_of_[blocks_[b].first + i] = b;
    }
  }
}

double CovarianceSampler::entry(std::size_t i, std::size_t j) const {
  if (i >= m_ || j >= m_) throw std::invalid_argument("entry: index out of range");
  if (i == j) return 1.0;
  if (const auto* ar = std::get_if<ArModel>(&model_.kind)) {
    const std::size_t d = i > j ? i - j : j - i;
    return std::pow(ar->lambda, static_cast<double>(d));
  }
  if (const auto* block = std::get_if<BlockModel>(&model_.kind)) {
    return (i / block->block_size == j / block->block_size) ? block->r : 0.0;
  }
  if (const auto* rb = std::get_if<RandomBlocksModel>(&model_.kind)) {
    return block_of_[i] == block_of_[j] ? rb->r : 0.0;
  }
  if (const auto* factor = std::get_if<FactorModel>(&model_.kind)) {
    return factor->tau * factor_h_[i] * factor_h_[j] * factor_scale_[i] * factor_scale_[j];
  }
  const auto* ex = std::get_if<ExplicitModel>(&model_.kind);
  return ex->matrix[i * m_ + j];
}

void CovarianceSampler::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != m_) throw std::invalid_argument("sample: output length mismatch");
  if (const auto* ar = std::get_if<ArModel>(&model_.kind)) {
    // Stationary AR(1) recursion; exact Cholesky of the AR correlation.
    const double lambda = ar->lambda;
    const double innovation = std::sqrt(1.0 - lambda * lambda);
    double previous = rng.normal();
    out[0] = previous;
    for (std::size_t i = 1; i < m_; ++i) {
      previous = lambda * previous + innovation * rng.normal();
      out[i] = previous;
    }
    return;
  }
  if (const auto* factor = std::get_if<FactorModel>(&model_.kind)) {
    // Rank-1 structure: z_i = (sqrt(tau) h_i u + g_i) / sqrt(1 + tau h_i^2).
    const double shared = rng.normal();
    const double root_tau = std::sqrt(factor->tau);
    for (std::size_t i = 0; i < m_; ++i) {
      out[i] = (root_tau * factor_h_[i] * shared + rng.normal()) * factor_scale_[i];
    }
    return;
  }
  if (!explicit_chol_.empty()) {
    std::vector<double> g(m_);
    for (auto& x : g) x = rng.normal();
    for (std::size_t i = 0; i < m_; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j <= i; ++j) sum += explicit_chol_[i * m_ + j] * g[j];
      out[i] = sum;
    }
    return;
  }
  // block kinds: per-block lower-triangular multiply
  std::vector<double> g;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto [offset, size] = blocks_[b];
    const auto& lower = block_chol_[block_chol_index_[b]];
    g.resize(size);
    for (auto& x : g) x = rng.normal();
    for (std::size_t i = 0; i < size; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j <= i; ++j) sum += lower[i * size + j] * g[j];
      out[offset + i] = sum;
    }
  }
}

void CovarianceSampler::sample(Rng& rng, std::span<const double> mu,
                               std::span<double> out) const {
  if (mu.size() != m_) throw std::invalid_argument("sample: mean length mismatch");
  sample(rng, out);
  for (std::size_t i = 0; i < m_; ++i) out[i] += mu[i];
}

namespace {

double explicit_l1(const ExplicitModel& ex) {
  double total = 0.0;
  for (const double value : ex.matrix) total += std::fabs(value);
  return total;
}

}  // namespace

double sigma_l1_norm(const CovarianceModel& model) {
  model.validate();
  const double m = static_cast<double>(model.m);
  if (const auto* ar = std::get_if<ArModel>(&model.kind)) {
    const double a = std::fabs(ar->lambda);
    double sum = 0.0;
    double power = 1.0;
    for (std::size_t d = 1; d < model.m; ++d) {
      power *= a;
      if (power == 0.0) break;
      sum += (m - static_cast<double>(d)) * power;
    }
    return m + 2.0 * sum;
  }
  if (const auto* block = std::get_if<BlockModel>(&model.kind)) {
    const double k = static_cast<double>(block->block_size);
    return (m / k) * (k + k * (k - 1.0) * std::fabs(block->r));
  }
  if (const auto* rb = std::get_if<RandomBlocksModel>(&model.kind)) {
    double total = 0.0;
    for (const std::size_t size : random_block_sizes(*rb, model.m)) {
      const double k = static_cast<double>(size);
      total += k + k * (k - 1.0) * std::fabs(rb->r);
    }
    return total;
  }
  if (const auto* factor = std::get_if<FactorModel>(&model.kind)) {
    // |sigma_ij| factorizes as tau a_i a_j with a_i = |h_i|/sqrt(1+tau h_i^2),
    // so the off-diagonal sum is tau ((sum a)^2 - sum a^2). Loadings are
    // re-derived from h_seed exactly as the sampler does.
    double sum_a = 0.0;
    double sum_a2 = 0.0;
    Rng rng(factor->h_seed, 0x68ULL);
    for (std::size_t i = 0; i < model.m; ++i) {
      const double h = rng.normal();
      const double a = std::fabs(h) / std::sqrt(1.0 + factor->tau * h * h);
      sum_a += a;
      sum_a2 += a * a;
    }
    return m + factor->tau * (sum_a * sum_a - sum_a2);
  }
  return explicit_l1(std::get<ExplicitModel>(model.kind));
}

double sigma_l1_norm_direct(const CovarianceModel& model) {
  model.validate();
  if (const auto* ex = std::get_if<ExplicitModel>(&model.kind)) {
    return explicit_l1(*ex);
  }
  const CovarianceSampler sampler(model);
  double total = 0.0;
  for (std::size_t i = 0; i < model.m; ++i) {
    for (std::size_t j = 0; j < model.m; ++j) {
      total += std::fabs(sampler.entry(i, j));
    }
  }
  return total;
}

double dependence_eta(const CovarianceModel& model, bool* clipped) {
  const double m = static_cast<double>(model.m);
  // 2 - log(l1)/log(m) is algebraically -log(l1/m^2)/log(m) and evaluates
  // to exactly 1 for the identity (l1 = m).
  double value = 2.0 - std::log(sigma_l1_norm(model)) / std::log(m);
  bool was_clipped = false;
  if (value < 0.0) {
    value = 0.0;
    was_clipped = true;
  } else if (value > 1.0) {
    value = 1.0;
    was_clipped = true;
  }
  if (clipped) *clipped = was_clipped;
  return value;
}

MuBounds mu_bounds(std::size_t m, double gamma, double eta) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::domain_error("mu_bounds: gamma must lie in (0, 1)");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::domain_error("mu_bounds: eta must lie in [0, 1]");
  }
  if (m < 17) {
    throw std::domain_error(
        "mu_bounds: m must be >= 17 so that log log log m is positive");
  }
  const double log_m = std::log(static_cast<double>(m));
  const double log3_m = std::log(std::log(log_m));
  MuBounds bounds;
  bounds.mu1 = std::sqrt(2.0 * gamma * log_m);
  const double slope = std::max(4.0 * gamma - 2.0 * eta, 0.0);
  bounds.mu2 = std::sqrt(slope * log_m + 4.0 * log3_m);
  bounds.mu_min = std::min(bounds.mu1, bounds.mu2);
  return bounds;
}

double phase_boundary(double gamma, double eta) {
  return std::min(gamma, 2.0 * gamma - eta);
}

std::vector<std::pair<double, double>> phase_boundary_polyline(double eta,
                                                               std::size_t n_points) {
  std::vector<std::pair<double, double>> polyline;
  polyline.reserve(n_points);
  for (std::size_t i = 1; i <= n_points; ++i) {
    const double gamma = static_cast<double>(i) / static_cast<double>(n_points + 1);
    polyline.emplace_back(gamma, phase_boundary(gamma, eta));
  }
  return polyline;
}

}  // namespace fnc
