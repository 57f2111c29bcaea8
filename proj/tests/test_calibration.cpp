#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fnc/calibration.hpp"
#include "fnc/io.hpp"

namespace {

fnc::NullEnsemble uniform_ensemble(std::size_t n_sets, std::size_t m, std::uint64_t seed) {
  fnc::NullEnsemble ensemble;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(1e-12, 1.0);
  ensemble.pvalue_sets.resize(n_sets);
  for (auto& set : ensemble.pvalue_sets) {
    set.resize(m);
    for (auto& p : set) p = uniform(rng);
  }
  return ensemble;
}

}  // namespace

TEST_CASE("v statistics by hand") {
  // interior ranks of (0.1, 0.2, 0.3, 0.4): j = 2 and j = 3
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  const auto v = fnc::v_statistics(p);
  CHECK(v.v_half == doctest::Approx(std::max(0.3 / std::sqrt(0.2), 0.45 / std::sqrt(0.3)))
                        .epsilon(1e-12));
  CHECK(v.v_half == doctest::Approx(0.8216).epsilon(1e-4));
  CHECK(v.v_one == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("perfect uniform spacing gives zero deviation") {
  for (const std::size_t m : {std::size_t{10}, std::size_t{20}, std::size_t{100}}) {
    std::vector<double> p(m);
    for (std::size_t j = 1; j <= m; ++j) p[j - 1] = static_cast<double>(j) / m;
    const auto v = fnc::v_statistics(p);
    CHECK(v.v_half == 0.0);
    CHECK(v.v_one == 0.0);
  }
}

TEST_CASE("v statistics need an interior rank") {
  const std::vector<double> two = {0.2, 0.4};
  CHECK_THROWS_AS(fnc::v_statistics(two), std::domain_error);
}

TEST_CASE("quantile level and nearest-rank rule") {
  CHECK(fnc::calibration_quantile_level(2000) == doctest::Approx(0.6373).epsilon(2e-4));
  CHECK(fnc::nearest_rank_quantile({1.0, 2.0, 3.0, 4.0}, 0.6373) == 3.0);
  CHECK(fnc::nearest_rank_quantile({4.0, 2.0, 1.0, 3.0}, 0.6373) == 3.0);  // order-free
  CHECK(fnc::nearest_rank_quantile({5.0}, 0.9) == 5.0);
  CHECK_THROWS_AS(fnc::nearest_rank_quantile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(fnc::nearest_rank_quantile({1.0}, 0.0), std::domain_error);
}

TEST_CASE("quantile is monotone under pointwise increase") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uniform(0.0, 10.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> base(25), larger(25);
    for (std::size_t i = 0; i < base.size(); ++i) {
      base[i] = uniform(rng);
      larger[i] = base[i] + uniform(rng);
    }
    const double q = 0.05 + 0.9 * (round / 50.0);
    CHECK(fnc::nearest_rank_quantile(larger, q) >= fnc::nearest_rank_quantile(base, q));
  }
}

TEST_CASE("identical sets collapse to their own V value") {
  fnc::NullEnsemble ensemble;
  const std::vector<double> row = {0.05, 0.21, 0.43, 0.66, 0.91};
  ensemble.pvalue_sets.assign(8, row);
  const auto bounds = fnc::bounding_sequences(ensemble);
  const auto v = fnc::v_statistics(row);
  CHECK(bounds.c_half == v.v_half);
  CHECK(bounds.c_one == v.v_one);
  CHECK(bounds.quantile_level == doctest::Approx(fnc::calibration_quantile_level(5)));
}

TEST_CASE("bounding sequences depend only on order statistics") {
  auto shuffled = uniform_ensemble(40, 50, 11);
  auto sorted = shuffled;
  for (auto& set : sorted.pvalue_sets) std::sort(set.begin(), set.end());
  const auto a = fnc::bounding_sequences(shuffled);
  const auto b = fnc::bounding_sequences(sorted);
  CHECK(a.c_half == b.c_half);
  CHECK(a.c_one == b.c_one);
}

TEST_CASE("simulated ensembles are deterministic and policy independent") {
  const auto model = fnc::parse_model_spec("ar:0.2", 80);
  const auto first = fnc::simulate_null_ensemble(model, 20, 5);
  const auto second = fnc::simulate_null_ensemble(model, 20, 5);
  CHECK(first.pvalue_sets == second.pvalue_sets);
  const auto serial =
      fnc::simulate_null_ensemble(model, 20, 5, fnc::Sidedness::one_sided,
                                  fnc::ExecutionPolicy::serial);
  CHECK(first.pvalue_sets == serial.pvalue_sets);
  const auto other_seed = fnc::simulate_null_ensemble(model, 20, 6);
  CHECK(first.pvalue_sets != other_seed.pvalue_sets);

  const auto bounds_parallel = fnc::bounding_sequences(first);
  const auto bounds_serial = fnc::bounding_sequences(first, fnc::ExecutionPolicy::serial);
  CHECK(bounds_parallel.c_half == bounds_serial.c_half);
  CHECK(bounds_parallel.c_one == bounds_serial.c_one);
}

TEST_CASE("null p-values from the identity model are uniform") {
  const auto model = fnc::parse_model_spec("ar:0", 500);
  const auto ensemble = fnc::simulate_null_ensemble(model, 40, 99);
  std::vector<double> pooled;
  pooled.reserve(40 * 500);
  for (const auto& set : ensemble.pvalue_sets) {
    pooled.insert(pooled.end(), set.begin(), set.end());
  }
  std::sort(pooled.begin(), pooled.end());
  double ks = 0.0;
  const double n = static_cast<double>(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const double hi = static_cast<double>(i + 1) / n - pooled[i];
    const double lo = pooled[i] - static_cast<double>(i) / n;
    ks = std::max({ks, hi, lo});
  }
  // one percent critical value of the Kolmogorov statistic
  CHECK(ks < 1.63 / std::sqrt(n));
}

TEST_CASE("calibration is stable across seeds") {
  const auto model = fnc::parse_model_spec("ar:0.2", 2000);
  const auto first = fnc::calibrate_model(model, 1000, 101);
  const auto second = fnc::calibrate_model(model, 1000, 202);
  CHECK(first.c_half > 0.0);
  CHECK(first.c_one > 0.0);
  CHECK(std::isfinite(first.c_half));
  CHECK(std::isfinite(first.c_one));
  CHECK(std::fabs(first.c_half - second.c_half) <= 0.05 * first.c_half);
  CHECK(std::fabs(first.c_one - second.c_one) <= 0.05 * first.c_one);
}

TEST_CASE("stronger dependence produces a larger c_half") {
  // autoregressive(0.2) is near independence; the factor model is strongly
  // dependent, so its half-power bound should dominate (majority of seeds)
  int wins = 0;
  for (const std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{3}}) {
    const auto weak = fnc::calibrate_model(fnc::parse_model_spec("ar:0.2", 2000), 1000, seed);
    const auto strong = fnc::calibrate_model(
        fnc::parse_model_spec("factor:0.5:" + std::to_string(seed), 2000), 1000, seed);
    if (weak.c_half <= strong.c_half) ++wins;
  }
  CHECK(wins >= 2);
}

TEST_CASE("ensemble csv round trip") {
  const auto ensemble = uniform_ensemble(6, 9, 123);
  const std::string path = "calibration_roundtrip.csv";
  fnc::atomic_write_file(path, fnc::ensemble_csv(ensemble));
  const auto loaded = fnc::read_ensemble_csv(path);
  REQUIRE(loaded.n_sets() == 6);
  REQUIRE(loaded.m() == 9);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(loaded.pvalue_sets[a][j] == ensemble.pvalue_sets[a][j]);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("ensemble validation") {
  fnc::NullEnsemble ensemble;
  ensemble.pvalue_sets = {{0.5, 0.2}};
  CHECK_THROWS_AS(ensemble.validate(), std::invalid_argument);  // one set only
  ensemble.pvalue_sets = {{0.5, 0.2}, {0.1}};
  CHECK_THROWS_AS(ensemble.validate(), std::invalid_argument);  // ragged
  ensemble.pvalue_sets = {{0.5, 0.2}, {0.1, 0.0}};
  CHECK_THROWS_AS(ensemble.validate(), std::invalid_argument);  // zero p-value
  CHECK_THROWS_AS(fnc::simulate_null_ensemble(fnc::parse_model_spec("ar:0", 10), 1, 3),
                  std::invalid_argument);
}
