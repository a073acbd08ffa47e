#include <doctest.h>

#include <cmath>

#include "lacelab/critical.hpp"
#include "lacelab/error.hpp"
#include "lacelab/verify.hpp"

using namespace lace;

namespace {

SyntheticSpec spec(double beta0, SignPattern signs = SignPattern::plus) {
  SyntheticSpec s;
  s.theta = 2.5;
  s.beta0 = beta0;
  s.signs = signs;
  return s;
}

// phi(z) = z + beta0 sum_{m=2}^{M} s_m z^m m^-theta - 1 in long double.
long double phi(long double z, double beta0, int M, SignPattern signs) {
  long double s = z;
  long double zm = z;
  for (int m = 2; m <= M; ++m) {
    zm *= z;
    s += sign_of(signs, m) * beta0 * zm * std::pow(static_cast<long double>(m), -2.5L);
  }
  return s - 1.0L;
}

// Plain bisection, deliberately unrelated to the library's bracketing.
double oracle_root(double beta0, int M, SignPattern signs) {
  long double lo = 0.5L;
  long double hi = 1.0L;
  if (phi(hi, beta0, M, signs) < 0) {
    lo = 1.0L;
    hi = 1.0L + 1e-6L;
    while (phi(hi, beta0, M, signs) < 0) hi = 1.0L + 2.0L * (hi - 1.0L);
  }
  for (int it = 0; it < 200; ++it) {
    const long double mid = 0.5L * (lo + hi);
    (phi(mid, beta0, M, signs) < 0 ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace

TEST_CASE("sequences for SRW") {
  const auto m = ModelSequences::simple_random_walk(make_uniform_box(2, 3), 64);
  const auto s = sequences(m, 1.0, 32);
  CHECK(s.v[0] == 1.0);
  CHECK(s.b[0] == 1.0);
  for (int n = 1; n <= 32; ++n) {
    CHECK(s.b[n] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.c[n] == 0.0);
    CHECK(s.v[n] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("sequences for the synthetic family") {
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 1), spec(0.1), 64);
  const auto s = sequences(m, 1.0, 2);
  const double g2 = 0.1 * std::pow(2.0, -2.5);
  CHECK(s.c[2] == doctest::Approx(g2).epsilon(1e-14));
  CHECK(s.b[2] == doctest::Approx(1.0 + 2.0 * g2).epsilon(1e-14));
  CHECK(s.v[2] == doctest::Approx((1.0 + 2.0 * g2) / (1.0 + g2)).epsilon(1e-14));
}

TEST_CASE("degenerate 1 + c_n is reported") {
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 1), spec(8.0, SignPattern::minus), 64);
  CHECK_THROWS_AS(sequences(m, 1.0, 16), DegenerateError);
}

TEST_CASE("z sequence") {
  const auto srw = ModelSequences::simple_random_walk(make_uniform_box(1, 2), 64);
  const auto zs = z_sequence(srw, 32);
  for (double z : zs.z) CHECK(z == 1.0);

  const auto m = ModelSequences::synthetic(make_uniform_box(1, 2), spec(0.1), 512);
  const auto zq = z_sequence(m, 256);
  CHECK(zq.z[0] == 1.0);
  CHECK(zq.z[1] == 1.0);
  CHECK(zq.z[2] == doctest::Approx(1.0 - 0.1 * std::pow(2.0, -2.5)).epsilon(1e-15));
  // Increments recomputed from the defining sums.
  const Vec zero{0.0};
  for (int j = 2; j < 256; ++j) {
    long double a = 0.0L;
    long double b = 0.0L;
    for (int mm = 2; mm <= j + 1; ++mm) a += m.g(mm, zero, zq.z[j]);
    for (int mm = 2; mm <= j; ++mm) b += m.g(mm, zero, zq.z[j - 1]);
    CHECK(std::abs(zq.increment[j + 1] - static_cast<double>(std::abs(a - b))) <= 1e-14);
  }
}

TEST_CASE("interval nesting under H1-sized constants") {
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 5), spec(0.05), 512);
  const auto zs = z_sequence(m, 256);
  const double beta = beta_for(5, 1, 2.0);
  const auto iv = induction_intervals(zs, 1.0 / beta, beta, 2.5);
  CHECK_FALSE(first_nesting_failure(iv).has_value());
  // A tiny K1 cannot absorb the increments.
  const auto tight = induction_intervals(zs, 1e-6, beta, 2.5);
  CHECK(first_nesting_failure(tight).has_value());
}

TEST_CASE("critical constants for SRW") {
  const auto m = ModelSequences::simple_random_walk(make_uniform_box(2, 2), 4096);
  const auto c = solve_zc(m, 4096);
  CHECK(std::abs(c.z_c - 1.0) <= 1e-10);
  CHECK(std::abs(c.A - 1.0) <= 1e-10);
  CHECK(std::abs(c.v - 1.0) <= 1e-10);
  CHECK(c.residual <= 1e-10);
}

TEST_CASE("critical point matches the closed-form series") {
  for (auto signs : {SignPattern::plus, SignPattern::alternating}) {
    const double beta0 = 0.1;
    const auto m = ModelSequences::synthetic(make_uniform_box(1, 3), spec(beta0, signs), 4096);
    const auto c = solve_zc(m, 4096);
    CHECK(std::abs(c.z_c - oracle_root(beta0, 4096, signs)) <= 1e-8);
    CHECK(c.residual <= 1e-10);
    if (signs == SignPattern::plus) CHECK(c.z_c < 1.0);
    // A = 1 / sum m g_m(0; z_c) by direct summation.
    long double mg = 0.0L;
    long double zm = 1.0L;
    for (int k = 1; k <= 4096; ++k) {
      zm *= c.z_c;
      mg += k * (k == 1 ? zm : sign_of(signs, k) * beta0 * zm * std::pow((long double)k, -2.5L));
    }
    CHECK(c.A == doctest::Approx(static_cast<double>(1.0L / mg)).epsilon(1e-10));
    CHECK(c.v == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(c.tail_estimate.has_value());
  }
}

TEST_CASE("residual decreases as M doubles") {
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 3), spec(0.1), 8192);
  const auto ref = solve_zc(m, 8192);
  double prev = INFINITY;
  for (int M = 8; M <= 4096; M *= 2) {
    const double r = std::abs(1.0 - truncated_g_sum(m, M, ref.z_c));
    CHECK(r <= prev);
    if (prev > 0.0) CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("all-negative signs have no critical point") {
  // 1 - z + beta0 sum z^m m^-theta > 0 for every z: the series never reaches 1.
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 3), spec(0.1, SignPattern::minus), 4096);
  CHECK_THROWS_AS(solve_zc(m, 4096), NoRootError);
}

TEST_CASE("no root is reported with sampled residuals") {
  const auto m = ModelSequences::synthetic(make_uniform_box(1, 3), spec(50.0, SignPattern::minus), 4096);
  try {
    solve_zc(m, 256);
    FAIL("expected NoRootError");
  } catch (const NoRootError& e) {
    CHECK(std::string(e.what()).find("sampled residuals") != std::string::npos);
  }
}

TEST_CASE("weakly SAW critical point from enumerated coefficients") {
  const auto m = ModelSequences::weakly_saw(make_uniform_box(1, 1), 0.01, 16);
  const auto c = solve_zc(m, 16);
  CHECK(c.residual <= 1e-10);
  // Direct check of the fixed-point equation at the returned z_c.
  long double s = 0.0L;
  for (int k = 1; k <= 16; ++k) s += m.g(k, Vec{0.0}, c.z_c);
  CHECK(std::abs(1.0L - s) <= 1e-10L);
  CHECK(c.z_c > 1.0);
}
