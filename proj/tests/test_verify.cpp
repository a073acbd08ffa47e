#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lacelab/error.hpp"
#include "lacelab/verify.hpp"

using namespace lace;

namespace {

constexpr double kPi = std::numbers::pi;

InductionParams base_params(double beta = 1.0) {
  InductionParams p;
  p.beta = beta;
  return p;
}

std::vector<Vec> k_points(int d, int count) {
  std::vector<Vec> ks{Vec(d, 0.0)};
  for (int i = 1; i < count; ++i) {
    Vec k(d, 0.0);
    const double mag = kPi * std::pow(static_cast<double>(i) / (count - 1), 2.0);
    k[0] = mag;
    if (d > 1) k[1] = -0.5 * mag;
    ks.push_back(k);
  }
  return ks;
}

CheckGrid grid_for(int d, Vec zs) {
  CheckGrid g;
  for (int m = 2; m <= 64; ++m) g.ms.push_back(m);
  g.ks = k_points(d, 24);
  g.zs = std::move(zs);
  return g;
}

const BoundReport& find(const std::vector<BoundReport>& rs, const std::string& id) {
  for (const auto& r : rs) {
    if (r.bound_id == id) return r;
  }
  FAIL("missing bound " << id);
  return rs.front();
}

}  // namespace

TEST_CASE("parameter gate accepts the reference exponents") {
  InductionParams p = base_params();
  CHECK(exponent_violations(p).empty());
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("parameter gate names each violated inequality") {
  struct Case {
    const char* name;
    void (*mutate)(InductionParams&);
  };
  const Case cases[] = {
      {"θ > 2 required", [](InductionParams& p) { p.theta = 2.0; }},
      {"0 < ε violated", [](InductionParams& p) { p.eps = 0.0; }},
      {"ε < θ − 2 violated", [](InductionParams& p) { p.eps = 0.5; }},
      {"0 < γ violated", [](InductionParams& p) { p.gamma = 0.0; }},
      {"γ < 1 ∧ ε violated", [](InductionParams& p) { p.gamma = 0.45; }},
      {"0 < δ violated", [](InductionParams& p) { p.delta = 0.0; }},
      {"δ < (1 ∧ ε) − γ violated", [](InductionParams& p) { p.delta = 0.2; }},
      {"θ − γ < λ violated", [](InductionParams& p) { p.lambda = 2.1; }},
      {"λ < θ violated", [](InductionParams& p) { p.lambda = 2.5; }},
  };
  for (const auto& c : cases) {
    InductionParams p = base_params();
    c.mutate(p);
    const auto v = exponent_violations(p);
    INFO(std::string(c.name));
    REQUIRE_FALSE(v.empty());
    CHECK(std::find(v.begin(), v.end(), std::string(c.name)) != v.end());
    try {
      validate(p);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(c.name) != std::string::npos);
    }
  }
}

TEST_CASE("ordering of the induction constants") {
  InductionParams p = base_params();
  p.K4 = 10.0;
  p.K1 = 20.0;
  p.K2 = 40.0;
  p.K3 = 200.0;
  p.K5 = 100.0;
  CHECK(ordering_violations(p).empty());
  p.K3 = 100.0;
  auto v = ordering_violations(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "K3 ≫ K1 violated");
  p.K3 = 200.0;
  p.K4p = 30.0;
  v = ordering_violations(p);
  CHECK(std::find(v.begin(), v.end(), "K1 > K4′ violated") != v.end());
  CHECK(std::find(v.begin(), v.end(), "K2 ≥ 3K4′ violated") != v.end());
  p.K4p.reset();
  p.C_g = 12.0;
  CHECK(p.K4_prime() == 12.0);
  p.K4p = 15.0;
  v = ordering_violations(p);
  CHECK(std::find(v.begin(), v.end(), "K4′ = max{C_e(cK4), C_g(cK4), K4} violated") != v.end());
}

TEST_CASE("RatioMax keeps the first maximising witness") {
  RatioMax r("X");
  const Vec k1{0.1}, k2{0.2}, k3{0.3};
  r.observe(1.0, 2.0, 1, k1, 1.0);
  r.observe(-3.0, 2.0, 2, k2, 1.0);
  r.observe(1.5, 1.0, 3, k3, 1.0);  // ties with the maximum: witness stays
  r.observe(0.0, 0.0, 4, k3, 1.0);  // skipped
  const auto rep = r.finish(1.4);
  CHECK(rep.empirical_constant == 1.5);
  CHECK(rep.witness.index == 2);
  CHECK(rep.witness.k == k2);
  CHECK(rep.tested_count == 3);
  CHECK_FALSE(rep.passes);
  CHECK(r.finish(std::nullopt).passes);
  CHECK(RatioMax("Y").finish(1.0).note == "no points tested");
}

TEST_CASE("property: empirical constants only grow as points are added") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RatioMax r("X");
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    r.observe(u(rng), std::abs(u(rng)) + 0.1, i, Vec{0.0}, 1.0);
    const double now = r.finish(std::nullopt).empirical_constant;
    CHECK(now >= prev);
    prev = now;
  }
}

TEST_CASE("SRW satisfies every hypothesis with constant zero") {
  for (int d : {1, 2}) {
    const auto model = ModelSequences::simple_random_walk(make_uniform_box(d, 3), 256);
    const InductionParams p = base_params(beta_for(3, d, 2.0));
    const auto grid = grid_for(d, Vec{0.95, 1.0});
    const Vec eps{0.0, 0.4};
    for (const auto& r : check_assumption_e(model, p, grid)) CHECK(r.empirical_constant == 0.0);
    for (const auto& r : check_assumption_g(model, p, grid, eps)) CHECK(r.empirical_constant == 0.0);

    const auto st = solve(model, 1.0, k_points(d, 32), 256);
    const auto seq = sequences(model, 1.0, 256);
    const auto h = check_h1_h4(model, st, seq, p);
    for (const char* id : {"H1", "H2", "H3a", "H3b"}) CHECK(find(h, id).empirical_constant == 0.0);
    for (const char* id : {"H4a", "H4b"}) {
      CHECK(std::isfinite(find(h, id).empirical_constant));
      CHECK(find(h, id).tested_count > 0);
    }
    QuadratureSpec q;
    q.grid_n = 64;
    if (d == 1) {
      const auto f = check_f_bounds(st, model.kernel(), p, lp_norms(model, 1.0, std::vector<int>{1, 2, 4}, Vec{2.0}, q));
      CHECK(find(f, "F2").empirical_constant == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(find(f, "F3").empirical_constant == doctest::Approx(1.0).epsilon(1e-12));
      CHECK_THROWS_AS(check_f_bounds(st, model.kernel(), p, {}), IncompleteInputError);
    }
  }
}

TEST_CASE("synthetic E and G constants stay below the family amplitudes") {
  const double beta = beta_for(4, 1, 2.0);
  SyntheticSpec s;
  s.theta = 2.5;
  s.beta0 = 0.1 * beta;
  s.beta0_e = 0.05 * beta;
  for (auto signs : {SignPattern::plus, SignPattern::alternating, SignPattern::minus}) {
    s.signs = signs;
    const auto model = ModelSequences::synthetic(make_uniform_box(1, 4), s, 64);
    const InductionParams p = base_params(beta);
    const auto grid = grid_for(1, Vec{0.9, 0.97, 1.0});
    const Vec eps{0.0, 0.2, 0.4};
    for (const auto& r : check_assumption_g(model, p, grid, eps)) {
      INFO(r.bound_id);
      CHECK(r.empirical_constant <= 0.1 + 1e-9);
      CHECK(r.empirical_constant > 0.0);
    }
    for (const auto& r : check_assumption_e(model, p, grid)) {
      INFO(r.bound_id);
      CHECK(r.empirical_constant <= 0.05 + 1e-9);
    }
  }
  // G1 attains the amplitude at k = 0, z = 1, m = 2.
  s.signs = SignPattern::plus;
  const auto model = ModelSequences::synthetic(make_uniform_box(1, 4), s, 64);
  const auto g = check_assumption_g(model, base_params(beta), grid_for(1, Vec{1.0}), Vec{0.0});
  CHECK(find(g, "G1").empirical_constant == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS(check_assumption_g(model, base_params(beta), grid_for(1, Vec{1.0}), Vec{0.5}));
  CheckGrid bad = grid_for(1, Vec{1.0});
  bad.ms.push_back(1);
  CHECK_THROWS(check_assumption_e(model, base_params(beta), bad));
}

TEST_CASE("H3 product reconstructs the solution") {
  SyntheticSpec s;
  s.beta0 = 0.05;
  s.beta0_e = 0.02;
  std::vector<ModelSequences> models{ModelSequences::simple_random_walk(make_uniform_box(2, 2), 256),
                                     ModelSequences::synthetic(make_uniform_box(1, 5), s, 256)};
  for (const auto& model : models) {
    const int d = model.kernel().dim();
    const auto ks = k_points(d, 20);
    const auto st = solve(model, 0.99, ks, 256);
    const auto seq = sequences(model, 0.99, 256);
    const auto rem = extract_h3_remainders(st, model.kernel(), seq, 1e-12, FloorPolicy::record);
    std::size_t tested = 0;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      for (int j = 1; j <= rem.defined_upto[ki]; ++j) {
        const double f = st.f[ki][j];
        const double prod = h3_product(rem, seq, ki, j);
        CHECK(std::abs(prod - f) <= 1e-10 * std::abs(f) + 1e-300);
        ++tested;
      }
    }
    CHECK(tested > 1000);
  }
}

TEST_CASE("H3 remainder at k = 0 is f_2(0) - 1 for i = 2") {
  SyntheticSpec s;
  s.beta0 = 0.1;
  const auto model = ModelSequences::synthetic(make_uniform_box(1, 2), s, 16);
  const auto st = solve(model, 1.0, std::vector<Vec>{Vec{0.0}}, 16);
  const auto seq = sequences(model, 1.0, 16);
  const auto rem = extract_h3_remainders(st, model.kernel(), seq);
  CHECK(rem.r[0][1] == doctest::Approx(0.0));
  // f_1(0) = 1, so r_2(0) = f_2(0) / f_1(0) - 1.
  CHECK(rem.r[0][2] == doctest::Approx(st.f[0][2] - 1.0).epsilon(1e-13));
  CHECK(rem.r[0][2] == doctest::Approx(0.1 * std::pow(2.0, -2.5)).epsilon(1e-13));
}

TEST_CASE("H3 floor handling") {
  // d = 1, L = 1: D-hat(pi / 2) = 0 so f_1 vanishes and factor 2 is undefined.
  const auto model = ModelSequences::simple_random_walk(make_uniform_box(1, 1), 8);
  const auto st = solve(model, 1.0, std::vector<Vec>{Vec{kPi / 2}}, 8);
  const auto seq = sequences(model, 1.0, 8);
  CHECK_THROWS_AS(extract_h3_remainders(st, model.kernel(), seq), DegenerateError);
  const auto rem = extract_h3_remainders(st, model.kernel(), seq, 1e-12, FloorPolicy::record);
  CHECK(rem.defined_upto[0] == 1);
  CHECK(std::isnan(rem.r[0][2]));
}

TEST_CASE("region decomposition") {
  CHECK(classify_region(0.0, 0.1, 0.2, 1.0) == 1);
  CHECK(classify_region(0.1, 1.5, 0.2, 1.0) == 2);
  CHECK(classify_region(0.3, 0.5, 0.2, 1.0) == 3);
  CHECK(classify_region(0.3, 1.5, 0.2, 1.0) == 4);

  // j = 1: the regime threshold is 0 so only k = 0 is factorised and the
  // total is ||D-hat^3||_1 = 4 / (3 pi) for d = 1, L = 1.
  const auto nn = ModelSequences::simple_random_walk(make_uniform_box(1, 1), 8);
  const auto r = region_decomposition(nn, 1.0, 1, 1.0, base_params(), 200000, 7, 0.25);
  CHECK(std::abs(r.total - 4.0 / (3.0 * kPi)) <= 4.0 * r.std_error);
  CHECK(r.count[0] + r.count[1] + r.count[2] + r.count[3] == 200000);
  CHECK(r.share[0] + r.share[1] + r.share[2] + r.share[3] == doctest::Approx(r.total).epsilon(1e-14));
  CHECK(r.r2_empty);

  // Large j on a spread-out kernel: a(k) <= gamma log j / j forces |k| small.
  const auto so = ModelSequences::simple_random_walk(make_uniform_box(2, 4), 1024);
  const auto big = region_decomposition(so, 1.0, 1024, 1.0, base_params(), 20000, 3, 0.1);
  CHECK(big.r2_empty);
  CHECK(big.count[0] > 0);
  const auto again = region_decomposition(so, 1.0, 1024, 1.0, base_params(), 20000, 3, 0.1);
  CHECK(again.total == big.total);
  CHECK_THROWS(region_decomposition(so, 1.0, 0, 1.0, base_params(), 100, 1, 0.1));
}

TEST_CASE("consequence checks report supplied constants only when known") {
  SyntheticSpec s;
  s.beta0 = 0.02;
  const auto model = ModelSequences::synthetic(make_uniform_box(1, 3), s, 128);
  const auto ks = k_points(1, 16);
  const auto st = solve(model, 1.0, ks, 128);
  const auto seq = sequences(model, 1.0, 128);
  QuadratureSpec q;
  q.grid_n = 128;
  const auto norms = lp_norms(model, 1.0, std::vector<int>{1, 2, 4, 8, 16, 32, 64, 128}, Vec{2.0}, q);
  InductionParams p = base_params(beta_for(3, 1, 2.0));
  CheckGrid grid = grid_for(1, Vec{1.0});
  const auto bare = check_consequences(model, st, seq, p, norms, grid, Vec{0.0});
  for (const auto& r : bare) {
    INFO(r.bound_id);
    CHECK_FALSE(r.supplied_constant.has_value());
    CHECK(r.passes);
  }
  p.K4 = 10.0;
  p.K1 = 20.0;
  p.K2 = 40.0;
  p.K3 = 200.0;
  p.K5 = 100.0;
  const auto full = check_consequences(model, st, seq, p, norms, grid, Vec{0.0});
  CHECK(find(full, "L42").supplied_constant.has_value());
  CHECK(find(full, "L45i").supplied_constant == 10.0);
  CHECK(all_pass(full));
}
