#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "lacelab/error.hpp"
#include "lacelab/kernel.hpp"

using namespace lace;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct complex-exponential sum; independent of the library's cosine path.
double oracle_fourier(const StepDistribution& dist, const Vec& k) {
  std::complex<double> s = 0.0;
  for (const auto& site : dist.support()) {
    double dot = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) dot += k[i] * site.x[i];
    s += site.mass * std::exp(std::complex<double>(0.0, dot));
  }
  return s.real();
}

}  // namespace

TEST_CASE("uniform box masses and variance") {
  const auto d1 = make_uniform_box(1, 1);
  REQUIRE(d1.support().size() == 2);
  for (const auto& s : d1.support()) CHECK(s.mass == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d1.sigma2() == doctest::Approx(1.0).epsilon(1e-15));

  const auto d2 = make_uniform_box(2, 1);
  REQUIRE(d2.support().size() == 8);
  for (const auto& s : d2.support()) CHECK(s.mass == doctest::Approx(1.0 / 8).epsilon(1e-15));

  const auto with0 = make_uniform_box(2, 2, true);
  CHECK(with0.support().size() == 25);
  CHECK(with0.includes_origin());
}

TEST_CASE("fourier closed forms on the nearest-neighbour kernel") {
  const auto d = make_uniform_box(1, 1);
  CHECK(fourier(d, Vec{0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fourier(d, Vec{kPi}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(fourier(d, Vec{kPi / 2})) < 1e-15);
  CHECK(a_of_k(d, Vec{0.0}) == 0.0);
  CHECK(a_of_k(d, Vec{kPi}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(a_of_k(d, Vec{kPi / 2}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("moments") {
  CHECK(moment(make_uniform_box(1, 1), 2.0) == doctest::Approx(1.0));
  CHECK(moment(make_uniform_box(1, 2), 2.0) == doctest::Approx(2.5));
  for (int d = 1; d <= 3; ++d) {
    const auto dist = make_uniform_box(d, 3);
    CHECK(std::abs(moment(dist, 0.0) - 1.0) < 1e-14);
    CHECK(moment(dist, 2.0) == dist.sigma2());
  }
}

TEST_CASE("fourier matches direct sum and is exact at the origin") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int d = 1; d <= 3; ++d) {
    for (int L : {1, 2, 4}) {
      for (bool origin : {false, true}) {
        const auto dist = make_uniform_box(d, L, origin);
        CHECK(std::abs(fourier(dist, Vec(d, 0.0)) - 1.0) <= 1e-14);
        for (int t = 0; t < 20; ++t) {
          Vec k(d);
          for (auto& x : k) x = u(rng);
          const double f = fourier(dist, k);
          CHECK(std::abs(f - oracle_fourier(dist, k)) < 1e-12);
          CHECK(std::abs(f) <= 1.0 + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("property: fourier is invariant under sign flips and permutations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const auto dist = make_uniform_box(3, 2);
  for (int t = 0; t < 50; ++t) {
    Vec k{u(rng), u(rng), u(rng)};
    const double base = fourier(dist, k);
    Vec flipped{-k[0], k[1], -k[2]};
    Vec permuted{k[2], k[0], k[1]};
    CHECK(fourier(dist, flipped) == base);
    CHECK(fourier(dist, permuted) == base);
  }
}

TEST_CASE("kernel spec parsing") {
  const auto d = parse_kernel_spec("2:3");
  CHECK(d.dim() == 2);
  CHECK(d.range() == 3);
  CHECK_FALSE(d.includes_origin());
  CHECK(parse_kernel_spec("1:2:include-origin").includes_origin());
  CHECK(d.spec_string() == "2:3");
  CHECK_THROWS(parse_kernel_spec("2"));
  CHECK_THROWS(parse_kernel_spec("0:3"));
}

TEST_CASE("explicit support is validated") {
  CHECK_THROWS_AS(StepDistribution(1, 1, {{{1}, 1.0, 0, 0}}), PreconditionError);  // not symmetric
  CHECK_THROWS_AS(StepDistribution(1, 1, {{{1}, 0.3, 0, 0}, {{-1}, 0.3, 0, 0}}), PreconditionError);
  CHECK_NOTHROW(StepDistribution(1, 1, {{{1}, 0.5, 1, 2}, {{-1}, 0.5, 1, 2}}));
}

TEST_CASE("assumption D on nearest-neighbour and include-origin kernels") {
  Vec mags{1e-3, 0.01, 0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, kPi};
  const auto nn = make_uniform_box(1, 1);
  const auto ks = axis_rays(1, mags);
  const auto rep = check_assumption_d(nn, ks);
  CHECK_FALSE(rep.holds_bound3);
  CHECK(rep.eta_bound3 == doctest::Approx(0.0).epsilon(1e-12));

  const auto lazy = make_uniform_box(1, 1, true);
  const auto rep2 = check_assumption_d(lazy, ks);
  CHECK(rep2.holds());
  // a(pi) = 1 - (1 + 2 cos pi) / 3 = 4/3
  CHECK(rep2.eta_bound3 == doctest::Approx(2.0 - 4.0 / 3.0).epsilon(1e-12));
  CHECK(rep2.eta > 0.0);
}

TEST_CASE("assumption D small-k bound on d=2 L=3") {
  const auto dist = make_uniform_box(2, 3);
  const auto rep = check_assumption_d(dist, default_k_samples(dist));
  CHECK(rep.holds_bound1);
  CHECK(rep.c1 > 0.0);
  CHECK(rep.c2 >= rep.c1);
  // a(k) ~ sigma^2 |k|^2 / (2d) as k -> 0 brackets the fitted constants.
  const double q = dist.sigma2() / (2.0 * 2 * 9.0);
  CHECK(rep.c1 <= q * (1 + 1e-3));
  CHECK(rep.c2 >= q * (1 - 1e-3));
}

TEST_CASE("assumption D needs both regimes") {
  const auto dist = make_uniform_box(1, 4);
  Vec small{1e-3, 1e-2};
  CHECK_THROWS_AS(check_assumption_d(dist, axis_rays(1, small)), RegimeUncoveredError);
  Vec large{2.0, 3.0};
  CHECK_THROWS_AS(check_assumption_d(dist, axis_rays(1, large)), RegimeUncoveredError);
  CHECK_THROWS_AS(check_assumption_d(dist, std::vector<Vec>{}), RegimeUncoveredError);
}

TEST_CASE("sample generators") {
  const auto lg = log_spaced(1e-3, 1.0, 4);
  REQUIRE(lg.size() == 4);
  CHECK(lg.front() == doctest::Approx(1e-3));
  CHECK(lg.back() == doctest::Approx(1.0));
  CHECK(tensor_grid(2, 4).size() == 16);
  CHECK_THROWS(tensor_grid(4, 2));
  for (const auto& k : diagonal_rays(3, Vec{10.0})) {
    for (double x : k) CHECK(std::abs(x) <= kPi + 1e-15);
  }
}
