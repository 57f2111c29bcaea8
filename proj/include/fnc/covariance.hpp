#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fnc/rng.hpp"

namespace fnc {

// Thrown when a matrix that should be positive definite is not.
class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sigma_ij = lambda^|i-j|
struct ArModel {
  double lambda = 0.0;
};

// Identical diagonal blocks of size k: unit diagonal, off-diagonal r.
struct BlockModel {
  std::size_t block_size = 1;
  double r = 0.0;
};

// n_blocks diagonal blocks with sizes drawn uniformly from
// [size_min, size_max], rescaled to sum to m (last block absorbs the
// remainder); within-block off-diagonal correlation r.
struct RandomBlocksModel {
  std::size_t n_blocks = 20;
  std::size_t size_min = 10;
  std::size_t size_max = 100;
  double r = 0.5;
  std::uint64_t seed = 0;
};

// V = tau h h^T + I with h ~ N(0, I_m) drawn once from h_seed;
// sigma_ij = V_ij / sqrt(V_ii V_jj).
struct FactorModel {
  double tau = 0.5;
  std::uint64_t h_seed = 0;
};

// Explicit correlation matrix, row-major m x m.
struct ExplicitModel {
  std::vector<double> matrix;
};

struct CovarianceModel {
  std::size_t m = 0;
  std::variant<ArModel, BlockModel, RandomBlocksModel, FactorModel, ExplicitModel> kind;

  void validate() const;     // throws std::invalid_argument
  std::string describe() const;  // "ar:0.2", "block:40:0.5", ...
};

// Prepared sampler: holds the structured factor (AR recursion weights,
// per-block Cholesky factors, factor-model loadings, or a dense Cholesky
// for explicit matrices) plus entry access to Sigma.
class CovarianceSampler {
 public:
  explicit CovarianceSampler(const CovarianceModel& model);

  std::size_t dim() const { return m_; }
  const CovarianceModel& model() const { return model_; }

  // Sigma entry; closed form for the structured kinds.
  double entry(std::size_t i, std::size_t j) const;

  // One centered draw z ~ N(0, Sigma); out must have length m.
  void sample(Rng& rng, std::span<double> out) const;

  // z ~ N(mu, Sigma).
  void sample(Rng& rng, std::span<const double> mu, std::span<double> out) const;

  // Block layout for the block-structured kinds (single block of size m
  // otherwise): vector of (offset, size).
  const std::vector<std::pair<std::size_t, std::size_t>>& blocks() const { return blocks_; }

 private:
  CovarianceModel model_;
  std::size_t m_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> blocks_;
  std::vector<std::vector<double>> block_chol_;  // lower factors, one per distinct size
  std::vector<std::size_t> block_chol_index_;
  std::vector<double> factor_h_;        // factor model loadings
  std::vector<double> factor_scale_;    // 1/sqrt(1 + tau h_i^2)
  std::vector<double> explicit_chol_;   // dense lower factor, row-major
  std::vector<std::size_t> block_of_;   // variable -> block id
};

// Sum_ij |sigma_ij| via closed forms (AR, block kinds, factor) or direct
// summation (explicit).
double sigma_l1_norm(const CovarianceModel& model);

// O(m^2) reference summation over entry(); used to cross-check the closed
// forms.
double sigma_l1_norm_direct(const CovarianceModel& model);

// eta = -log(|Sigma|_1 / m^2) / log m, natural logs, clipped to [0, 1].
// *clipped (optional) reports whether clipping fired.
double dependence_eta(const CovarianceModel& model, bool* clipped = nullptr);

struct MuBounds {
  double mu1 = 0.0;      // sqrt(2 gamma log m)
  double mu2 = 0.0;      // sqrt((4 gamma - 2 eta)_+ log m + 4 logloglog m)
  double mu_min = 0.0;
};

// Requires m >= 17 so the triple log is positive. Throws std::domain_error
// otherwise.
MuBounds mu_bounds(std::size_t m, double gamma, double eta);

// min(gamma, 2 gamma - eta); negative values mean any r > 0 suffices.
double phase_boundary(double gamma, double eta);

// Boundary polyline r(gamma) over an even grid on (0, 1), for plotting.
std::vector<std::pair<double, double>> phase_boundary_polyline(double eta,
                                                               std::size_t n_points = 99);

// Dense lower Cholesky of a row-major n x n matrix. Throws
// DecompositionError when the matrix is not positive definite.
std::vector<double> cholesky_lower(const std::vector<double>& matrix, std::size_t n);

// Deterministic block sizes for a RandomBlocksModel instance.
std::vector<std::size_t> random_block_sizes(const RandomBlocksModel& blocks, std::size_t m);

}  // namespace fnc
