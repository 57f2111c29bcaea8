#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fnc/normal.hpp"

namespace {

// Independent oracle: upper-tail probability by composite 10-point
// Gauss-Legendre quadrature of the density in long double. Never touches
// erfc, so it can certify the production route.
long double density(long double x) {
  return 0.39894228040143267794L * std::exp(-0.5L * x * x);
}

long double gauss_panel(long double a, long double b) {
  static const long double nodes[5] = {0.14887433898163121089L, 0.43339539412924719080L,
                                       0.67940956829902440623L, 0.86506336668898451073L,
                                       0.97390652851717172008L};
  static const long double weights[5] = {0.29552422471475287017L, 0.26926671930999635509L,
                                         0.21908636251598204400L, 0.14945134915058059315L,
                                         0.06667134430868813759L};
  const long double mid = 0.5L * (a + b);
  const long double half = 0.5L * (b - a);
  long double sum = 0.0L;
  for (int i = 0; i < 5; ++i) {
    sum += weights[i] * (density(mid - half * nodes[i]) + density(mid + half * nodes[i]));
  }
  return half * sum;
}

long double integrate(double x, int panels) {
  // everything beyond x + 14 is negligible relative to the tail mass
  const long double a = x;
  const long double b = x + 14.0L;
  const long double width = (b - a) / panels;
  long double total = 0.0L;
  for (int i = panels - 1; i >= 0; --i) {  // small pieces first
    total += gauss_panel(a + i * width, a + (i + 1) * width);
  }
  return total;
}

double oracle_upper_tail(double x) {
  const long double coarse = integrate(x, 70);
  const long double fine = integrate(x, 140);
  // the oracle validates itself before certifying anything else
  REQUIRE(fabsl(fine - coarse) <= 1e-15L * fine);
  return static_cast<double>(fine);
}

}  // namespace

TEST_CASE("cdf and tail at zero are exactly one half") {
  CHECK(fnc::normal_cdf(0.0) == 0.5);
  CHECK(fnc::normal_tail(0.0) == 0.5);
}

TEST_CASE("tail matches the quadrature oracle") {
  CHECK(fnc::normal_tail(2.14) == doctest::Approx(oracle_upper_tail(2.14)).epsilon(1e-10));
  CHECK(fnc::normal_tail(2.14) == doctest::Approx(0.0161773959).epsilon(1e-6));
  for (double x = 0.0; x <= 8.0; x += 0.37) {
    const double expected = oracle_upper_tail(x);
    CHECK(std::fabs(fnc::normal_tail(x) - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("cdf/tail symmetry") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> grid(-8.0, 8.0);
  for (int i = 0; i < 200; ++i) {
    const double x = grid(rng);
    CHECK(fnc::normal_cdf(-x) == doctest::Approx(fnc::normal_tail(x)).epsilon(1e-14));
    CHECK(fnc::normal_cdf(x) + fnc::normal_tail(x) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("quantile round trips the cdf") {
  CHECK(fnc::normal_quantile(fnc::normal_cdf(1.7)) == doctest::Approx(1.7).epsilon(1e-10));
  // Relative accuracy 1e-12 over |x| <= 8, probed through the small-tail
  // argument where the inverse problem is well conditioned (near q = 1 the
  // rounding of q alone moves the exact answer by more than 1e-12).
  for (double x = 0.0; x <= 8.0; x += 0.29) {
    const double tail = fnc::normal_tail(x);
    CHECK(std::fabs(fnc::normal_quantile(tail) + x) <= 1e-12 * std::max(1.0, x));
    CHECK(std::fabs(fnc::normal_quantile(fnc::normal_cdf(-x)) + x) <=
          1e-12 * std::max(1.0, x));
  }
}

TEST_CASE("quantile agrees with the oracle tail") {
  for (double x = 0.25; x <= 8.0; x += 0.75) {
    const double q = oracle_upper_tail(x);  // P(Z > x)
    CHECK(fnc::normal_quantile(q) == doctest::Approx(-x).epsilon(1e-11));
  }
  // near the center the complementary argument is well conditioned too
  for (double x = 0.25; x <= 2.5; x += 0.75) {
    CHECK(fnc::normal_quantile(1.0 - oracle_upper_tail(x)) ==
          doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("quantile rejects arguments outside (0,1)") {
  CHECK_THROWS_AS(fnc::normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(fnc::normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(fnc::normal_quantile(-0.2), std::domain_error);
  CHECK_THROWS_AS(fnc::normal_quantile(1.0001), std::domain_error);
}
