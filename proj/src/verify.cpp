#include "lacelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lacelab/error.hpp"

namespace lace {

namespace {

std::string fmt_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double dpow(int base, double e) { return std::pow(static_cast<double>(base), e); }

std::optional<std::size_t> zero_index(const std::vector<Vec>& ks) {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (std::all_of(ks[i].begin(), ks[i].end(), [](double c) { return c == 0.0; })) return i;
  }
  return std::nullopt;
}

// f_m(0) from the k-set when k = 0 is present, else from the companion data.
std::optional<Vec> values_at_zero(const RecursionState& state) {
  if (auto zi = zero_index(state.k_set)) return state.f[*zi];
  if (state.f_at_zero) return *state.f_at_zero;
  return std::nullopt;
}

void require_grid_ms(const CheckGrid& grid) {
  for (int m : grid.ms) {
    if (m < 2) throw PreconditionError("coefficient checks need m >= 2 in the grid");
  }
}

}  // namespace

double InductionParams::K4_prime() const {
  if (K4p) return *K4p;
  return std::max({C_e.value_or(0.0), C_g.value_or(0.0), K4});
}

double beta_for(int L, int d, double p_star) {
  return std::pow(static_cast<double>(L), -static_cast<double>(d) / p_star);
}

std::vector<std::string> exponent_violations(const InductionParams& p) {
  std::vector<std::string> v;
  const double one_eps = std::min(1.0, p.eps);
  if (!(p.theta > 2.0)) v.emplace_back("θ > 2 required");
  if (!(p.eps > 0.0)) v.emplace_back("0 < ε violated");
  if (!(p.eps < p.theta - 2.0)) v.emplace_back("ε < θ − 2 violated");
  if (!(p.gamma > 0.0)) v.emplace_back("0 < γ violated");
  if (!(p.gamma < one_eps)) v.emplace_back("γ < 1 ∧ ε violated");
  if (!(p.delta > 0.0)) v.emplace_back("0 < δ violated");
  if (!(p.delta < one_eps - p.gamma)) v.emplace_back("δ < (1 ∧ ε) − γ violated");
  if (!(p.theta - p.gamma < p.lambda)) v.emplace_back("θ − γ < λ violated");
  if (!(p.lambda < p.theta)) v.emplace_back("λ < θ violated");
  if (!(p.p_star >= 1.0)) v.emplace_back("p* ≥ 1 violated");
  if (p.B.empty()) v.emplace_back("B nonempty violated");
  for (double b : p.B) {
    if (!(b >= 1.0 && b <= p.p_star)) {
      v.emplace_back("B ⊂ [1, p*] violated");
      break;
    }
  }
  if (!(p.beta > 0.0)) v.emplace_back("β > 0 violated");
  return v;
}

std::vector<std::string> ordering_violations(const InductionParams& p) {
  std::vector<std::string> v;
  if (!p.has_constants()) return v;
  const double R = p.gg_ratio;
  const double K4p = p.K4_prime();
  if (!(p.K3 >= R * p.K1)) v.emplace_back("K3 ≫ K1 violated");
  if (!(p.K1 > K4p)) v.emplace_back("K1 > K4′ violated");
  if (!(K4p >= p.K4)) v.emplace_back("K4′ ≥ K4 violated");
  if (!(p.K4 >= R)) v.emplace_back("K4 ≫ 1 violated");
  if (!(p.K2 >= p.K1)) v.emplace_back("K2 ≥ K1 violated");
  if (!(p.K2 >= 3.0 * K4p)) v.emplace_back("K2 ≥ 3K4′ violated");
  if (!(p.K5 >= R * p.K4)) v.emplace_back("K5 ≫ K4 violated");
  if (p.K4p && (p.C_e || p.C_g)) {
    const double expect = std::max({p.C_e.value_or(0.0), p.C_g.value_or(0.0), p.K4});
    if (std::abs(*p.K4p - expect) > 1e-12 * std::max(1.0, expect)) {
      v.emplace_back("K4′ = max{C_e(cK4), C_g(cK4), K4} violated");
    }
  }
  return v;
}

void validate(const InductionParams& p) {
  auto v = exponent_violations(p);
  auto o = ordering_violations(p);
  v.insert(v.end(), o.begin(), o.end());
  if (v.empty()) return;
  std::string msg = "parameter constraint violated: " + v.front();
  for (std::size_t i = 1; i < v.size(); ++i) msg += "; " + v[i];
  throw ConfigError(msg);
}

void RatioMax::observe(double lhs, double envelope, int index, std::span<const double> k, double z) {
  const double num = std::abs(lhs);
  if (num == 0.0 && envelope == 0.0) return;
  const double ratio = envelope > 0.0 ? num / envelope : std::numeric_limits<double>::infinity();
  ++report_.tested_count;
  if (!any_ || ratio > report_.empirical_constant) {
    any_ = true;
    report_.empirical_constant = ratio;
    report_.witness = {index, Vec(k.begin(), k.end()), z};
  }
}

BoundReport RatioMax::finish(std::optional<double> supplied, std::string note) const {
  BoundReport r = report_;
  r.supplied_constant = supplied;
  r.passes = !supplied || r.empirical_constant <= *supplied;
  if (!note.empty()) r.note = std::move(note);
  if (r.tested_count == 0 && r.note.empty()) r.note = "no points tested";
  return r;
}

bool all_pass(std::span<const BoundReport> reports) {
  return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.passes; });
}

// ---------------------------------------------------------------------------

std::vector<BoundReport> check_f_bounds(const RecursionState& state, const StepDistribution& kernel,
                                        const InductionParams& params, std::span<const NormEstimate> norms) {
  std::vector<BoundReport> out;
  const int d = kernel.dim();
  const double L = kernel.range();
  const Vec zero(d, 0.0);

  for (double p : params.B) {
    RatioMax f1("F1[p=" + fmt_num(p) + "]");
    bool found = false;
    for (const auto& n : norms) {
      if (std::abs(n.p - p) > 1e-12 || n.m < 1) continue;
      found = true;
      const double env = std::pow(L, -d / p) * dpow(n.m, -expected_decay_exponent(d, p, params.theta));
      f1.observe(n.value, env, n.m, zero, state.z);
    }
    if (!found) throw IncompleteInputError("check_f_bounds: missing norms for p = " + fmt_num(p));
    out.push_back(f1.finish(params.K_f));
  }

  RatioMax f2("F2");
  RatioMax f3("F3");
  const auto f0 = values_at_zero(state);
  if (f0) {
    for (int m = 1; m <= state.horizon; ++m) f2.observe((*f0)[m], 1.0, m, zero, state.z);
  }
  out.push_back(f2.finish(params.K_f, f0 ? "" : "f_m(0) unavailable"));
  if (state.laplacian0) {
    for (int m = 1; m <= state.horizon; ++m) {
      f3.observe((*state.laplacian0)[m], kernel.sigma2() * m, m, zero, state.z);
    }
  }
  out.push_back(f3.finish(params.K_f, state.laplacian0 ? "" : "Laplacian at 0 unavailable"));
  return out;
}

std::vector<BoundReport> check_assumption_e(const ModelSequences& model, const InductionParams& params,
                                            const CheckGrid& grid) {
  require_grid_ms(grid);
  RatioMax e1("E1");
  RatioMax e2("E2");
  if (grid.ms.empty()) return {e1.finish(params.C_e), e2.finish(params.C_e)};
  const int max_m = *std::max_element(grid.ms.begin(), grid.ms.end());
  const Vec zero(model.kernel().dim(), 0.0);
  const double beta = params.beta;
  const double theta = params.theta;
  for (double z : grid.zs) {
    const Vec e0 = model.e_values(zero, z, max_m);
    for (const auto& k : grid.ks) {
      const Vec ek = model.e_values(k, z, max_m);
      const double a = a_of_k(model.kernel(), k);
      for (int m : grid.ms) {
        e1.observe(ek[m - 1], beta * dpow(m, -theta), m, k, z);
        if (a > 0.0) e2.observe(ek[m - 1] - e0[m - 1], a * beta * dpow(m, 1.0 - theta), m, k, z);
      }
    }
  }
  return {e1.finish(params.C_e), e2.finish(params.C_e)};
}

std::vector<BoundReport> check_assumption_g(const ModelSequences& model, const InductionParams& params,
                                            const CheckGrid& grid, std::span<const double> eps_primes) {
  require_grid_ms(grid);
  for (double ep : eps_primes) {
    if (!(ep >= 0.0 && ep <= params.eps)) {
      throw PreconditionError("check_assumption_g: ε′ must lie in [0, ε]");
    }
  }
  RatioMax g1("G1");
  RatioMax g2("G2");
  RatioMax g3("G3");
  std::vector<RatioMax> g4;
  for (double ep : eps_primes) g4.emplace_back("G4[eps'=" + fmt_num(ep) + "]");

  const double beta = params.beta;
  const double theta = params.theta;
  const double s2 = model.kernel().sigma2();
  const Vec zero(model.kernel().dim(), 0.0);
  const int max_m = grid.ms.empty() ? 0 : *std::max_element(grid.ms.begin(), grid.ms.end());
  for (double z : grid.zs) {
    if (max_m == 0) break;
    const Vec g0 = model.g_values(zero, z, max_m);
    Vec lap(max_m + 1, 0.0);
    for (int m : grid.ms) {
      lap[m] = model.g_laplacian_at_zero(m, z);
      g2.observe(lap[m], s2 * beta * dpow(m, 1.0 - theta), m, zero, z);
      g3.observe(model.g_z_derivative_at_zero(m, z), beta * dpow(m, 1.0 - theta), m, zero, z);
    }
    for (const auto& k : grid.ks) {
      const Vec gk = model.g_values(k, z, max_m);
      const double a = a_of_k(model.kernel(), k);
      for (int m : grid.ms) {
        g1.observe(gk[m - 1], beta * dpow(m, -theta), m, k, z);
        if (a <= 0.0) continue;
        const double rem = gk[m - 1] - g0[m - 1] - a / s2 * lap[m];
        for (std::size_t i = 0; i < eps_primes.size(); ++i) {
          const double ep = eps_primes[i];
          g4[i].observe(rem, beta * std::pow(a, 1.0 + ep) * dpow(m, 1.0 - theta + ep), m, k, z);
        }
      }
    }
  }
  std::vector<BoundReport> out{g1.finish(params.C_g), g2.finish(params.C_g), g3.finish(params.C_g)};
  for (const auto& r : g4) out.push_back(r.finish(params.C_g));
  return out;
}

// ---------------------------------------------------------------------------

H3Remainders extract_h3_remainders(const RecursionState& state, const StepDistribution& kernel,
                                   const SequenceState& seq, double ratio_floor, FloorPolicy policy) {
  if (seq.z != state.z) throw PreconditionError("extract_h3_remainders: sequences computed at a different z");
  if (seq.n() < state.horizon) throw PreconditionError("extract_h3_remainders: sequences shorter than horizon");
  H3Remainders out;
  const std::size_t nk = state.k_set.size();
  out.r.assign(nk, Vec(state.horizon + 1, 0.0));
  out.a.assign(nk, 0.0);
  out.defined_upto.assign(nk, state.horizon);
  for (std::size_t ki = 0; ki < nk; ++ki) {
    const double a = a_of_k(kernel, state.k_set[ki]);
    out.a[ki] = a;
    const Vec& f = state.f[ki];
    for (int i = 1; i <= state.horizon; ++i) {
      if (!(std::abs(f[i - 1]) > ratio_floor)) {
        if (policy == FloorPolicy::throw_on_violation) {
          throw DegenerateError("extract_h3_remainders: undefined factor at i = " + std::to_string(i) +
                                ", k index " + std::to_string(ki));
        }
        out.defined_upto[ki] = i - 1;
        for (int r = i; r <= state.horizon; ++r) out.r[ki][r] = std::nan("");
        break;
      }
      const double ratio = state.g1[ki] + state.memory[ki][i] / f[i - 1];
      out.r[ki][i] = (ratio - 1.0) + seq.v[i] * a;
    }
  }
  return out;
}

double h3_product(const H3Remainders& rem, const SequenceState& seq, std::size_t k_index, int j) {
  double prod = 1.0;
  const double a = rem.a[k_index];
  for (int i = 1; i <= j; ++i) prod *= 1.0 - seq.v[i] * a + rem.r[k_index][i];
  return prod;
}

std::vector<BoundReport> check_h1_h4(const ModelSequences& model, const RecursionState& state,
                                     const SequenceState& seq, const InductionParams& params,
                                     RegimeCounts* regimes) {
  const int n = state.horizon;
  const double beta = params.beta;
  const double theta = params.theta;
  const double z = state.z;
  const Vec zero(model.kernel().dim(), 0.0);
  RegimeCounts counts;

  RatioMax h1("H1");
  const ZSequence zs = z_sequence(model, n);
  for (int j = 1; j <= n; ++j) h1.observe(zs.increment[j], beta * dpow(j, -theta), j, zero, z);

  RatioMax h2("H2");
  for (int j = 1; j <= n; ++j) h2.observe(seq.v[j] - seq.v[j - 1], beta * dpow(j, 1.0 - theta), j, zero, z);

  const H3Remainders rem = extract_h3_remainders(state, model.kernel(), seq, 1e-12, FloorPolicy::record);

  // r_i(0): from k = 0 in the set, else from the k = 0 companion values.
  Vec r0(n + 1, std::nan(""));
  int r0_upto = 0;
  if (auto zi = zero_index(state.k_set)) {
    r0 = rem.r[*zi];
    r0_upto = rem.defined_upto[*zi];
  } else if (state.f_at_zero) {
    const Vec& f0 = *state.f_at_zero;
    for (int i = 1; i <= n; ++i) {
      if (!(std::abs(f0[i - 1]) > 1e-12)) break;
      r0[i] = f0[i] / f0[i - 1] - 1.0;
      r0_upto = i;
    }
  }

  RatioMax h3a("H3a");
  for (int i = 1; i <= r0_upto; ++i) h3a.observe(r0[i], beta * dpow(i, 1.0 - theta), i, zero, z);

  // Factor i enters the H3 product for every j in [i, n]; it is tested when
  // k lies in the factorised regime for at least one such j.
  Vec suffix_thr(n + 2, 0.0);
  for (int j = n; j >= 1; --j) suffix_thr[j] = std::max(suffix_thr[j + 1], regime_threshold(params.gamma, j));

  RatioMax h3b("H3b");
  RatioMax h4a("H4a");
  RatioMax h4b("H4b");
  for (std::size_t ki = 0; ki < state.k_set.size(); ++ki) {
    const double a = rem.a[ki];
    const auto& k = state.k_set[ki];
    if (a > 0.0) {
      const int top = std::min(rem.defined_upto[ki], r0_upto);
      for (int i = 1; i <= top; ++i) {
        if (a <= suffix_thr[i]) {
          h3b.observe(rem.r[ki][i] - r0[i], beta * a * dpow(i, -params.delta), i, k, z);
        }
      }
    }
    const Vec& f = state.f[ki];
    for (int j = 1; j <= n; ++j) {
      const double thr = regime_threshold(params.gamma, j);
      if (a > thr) {
        ++counts.h4_points;
        h4a.observe(f[j], std::pow(a, -params.lambda) * dpow(j, -theta), j, k, z);
        h4b.observe(f[j] - f[j - 1], std::pow(a, 1.0 - params.lambda) * dpow(j, -theta), j, k, z);
      } else {
        ++counts.h3_points;
      }
    }
  }
  for (int j = 1; j <= n; ++j) {
    const double thr = regime_threshold(params.gamma, j);
    const bool any = std::any_of(rem.a.begin(), rem.a.end(), [&](double a) { return a > 0.0 && a <= thr; });
    if (!any) counts.empty_h3_at.push_back(j);
  }
  if (regimes) *regimes = counts;

  auto opt = [](double K) { return K > 0.0 ? std::optional<double>(K) : std::nullopt; };
  std::string h3_note;
  if (!counts.empty_h3_at.empty()) {
    h3_note = "factorised regime empty at " + std::to_string(counts.empty_h3_at.size()) + " values of j";
  }
  return {h1.finish(opt(params.K1)),         h2.finish(opt(params.K2)),
          h3a.finish(opt(params.K3)),        h3b.finish(opt(params.K3), h3_note),
          h4a.finish(opt(params.K4)),        h4b.finish(opt(params.K5))};
}

std::vector<BoundReport> check_consequences(const ModelSequences& model, const RecursionState& state,
                                            const SequenceState& seq, const InductionParams& params,
                                            std::span<const NormEstimate> norms, const CheckGrid& grid,
                                            std::span<const double> eps_primes) {
  (void)seq;
  std::vector<BoundReport> out;
  const StepDistribution& kernel = model.kernel();
  const int d = kernel.dim();
  const double L = kernel.range();
  const double beta = params.beta;
  const double C = params.C;
  const double z = state.z;
  const Vec zero(d, 0.0);
  const int n = state.horizon;

  // Lemma 4.2: |f_j(k)| <= P exp(-(1 - kappa) j a(k)) on the factorised regime.
  const double P_supplied = std::exp(C * params.K3 * beta);
  const double kappa_supplied = C * (params.K2 + params.K3) * beta;
  RatioMax prefactor("L42");
  RatioMax deficit("L42r");
  for (std::size_t ki = 0; ki < state.k_set.size(); ++ki) {
    const auto& k = state.k_set[ki];
    const double a = a_of_k(kernel, k);
    for (int j = 1; j <= n; ++j) {
      if (a > regime_threshold(params.gamma, j)) continue;
      const double fj = std::abs(state.f[ki][j]);
      prefactor.observe(fj, std::exp(-(1.0 - kappa_supplied) * j * a), j, k, z);
      if (a > 0.0 && fj > 0.0) {
        const double kappa = std::max(0.0, 1.0 + std::log(fj / P_supplied) / (j * a));
        deficit.observe(kappa, 1.0, j, k, z);
      }
    }
  }
  // Without induction constants the lemmas have nothing to be compared with.
  const bool supplied = params.has_constants();
  auto maybe = [&](double v) { return supplied ? std::optional<double>(v) : std::nullopt; };
  out.push_back(prefactor.finish(maybe(P_supplied)));
  out.push_back(deficit.finish(maybe(kappa_supplied)));

  // Lemma 4.3
  for (double p : params.B) {
    RatioMax l43("L43[p=" + fmt_num(p) + "]");
    for (const auto& nrm : norms) {
      if (std::abs(nrm.p - p) > 1e-12 || nrm.m < 1) continue;
      const double env = std::pow(L, -d / p) * dpow(nrm.m, -expected_decay_exponent(d, p, params.theta));
      l43.observe(nrm.value, env, nrm.m, zero, z);
    }
    out.push_back(l43.finish(maybe(C * (1.0 + params.K4))));
  }

  // Lemma 4.4
  RatioMax l44("L44");
  if (state.laplacian0) {
    for (int j = 1; j <= n; ++j) l44.observe((*state.laplacian0)[j], kernel.sigma2() * j, j, zero, z);
  }
  out.push_back(l44.finish(maybe(1.0 + kappa_supplied), state.laplacian0 ? "" : "Laplacian at 0 unavailable"));

  // Lemma 4.5: the E/G ratios against the K4' envelope.
  InductionParams p45 = params;
  const double K4p = params.K4_prime();
  p45.C_g = K4p > 0.0 ? std::optional<double>(K4p) : std::nullopt;
  p45.C_e = p45.C_g;
  static const char* kRoman[] = {"i", "ii", "iii", "iv", "v", "vi"};
  auto g = check_assumption_g(model, p45, grid, eps_primes);
  auto e = check_assumption_e(model, p45, grid);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto r = g[i];
    const std::string suffix = i < 3 ? "" : r.bound_id.substr(2);
    r.bound_id = std::string("L45") + kRoman[std::min<std::size_t>(i, 3)] + suffix;
    out.push_back(std::move(r));
  }
  e[0].bound_id = "L45v";
  e[1].bound_id = "L45vi";
  out.push_back(std::move(e[0]));
  out.push_back(std::move(e[1]));
  return out;
}

// ---------------------------------------------------------------------------

int classify_region(double a, double k_inf, double threshold, double inv_L) {
  const bool small = k_inf <= inv_L;
  if (a <= threshold) return small ? 1 : 2;
  return small ? 3 : 4;
}

RegionReport region_decomposition(const ModelSequences& model, double z, int j, double p,
                                  const InductionParams& params, std::uint64_t samples, std::uint64_t seed,
                                  double gaussian_rate) {
  if (j < 1) throw PreconditionError("region_decomposition: j must be >= 1");
  if (!(p >= 1.0)) throw PreconditionError("region_decomposition: p >= 1 required");
  if (samples < 2) throw PreconditionError("region_decomposition: need at least 2 samples");
  const StepDistribution& kernel = model.kernel();
  const double L = kernel.range();
  const double inv_L = 1.0 / L;

  RegionReport rep;
  rep.j = j;
  rep.p = p;
  rep.samples = samples;
  rep.seed = seed;
  rep.threshold = regime_threshold(params.gamma, j);
  rep.gaussian_rate = gaussian_rate;

  TorusSampler sampler(kernel.dim(), seed);
  std::array<Vec, 4> chunk_sums;
  Vec sq_sums;
  constexpr std::uint64_t kChunk = 2048;
  std::vector<Vec> chunk;
  std::array<Vec, 4> vals;
  Vec sq;
  for (std::uint64_t done = 0; done < samples;) {
    chunk.clear();
    while (chunk.size() < kChunk && done < samples) {
      chunk.push_back(sampler.next());
      ++done;
    }
    const RecursionState st = solve(model, z, chunk, j, false);
    for (auto& v : vals) v.clear();
    sq.clear();
    for (std::size_t ki = 0; ki < chunk.size(); ++ki) {
      const auto& k = chunk[ki];
      const double dhat = fourier(kernel, k);
      const double a = 1.0 - dhat;
      const double val = std::pow(std::abs(dhat * dhat * st.f[ki][j]), p);
      const int region = classify_region(a, norm_inf(k), rep.threshold, inv_L);
      vals[region - 1].push_back(val);
      sq.push_back(val * val);
      ++rep.count[region - 1];
      if (region == 1) {
        const double k2 = norm2_squared(k);
        rep.r1_envelope_constant =
            std::max(rep.r1_envelope_constant, val * std::exp(gaussian_rate * p * j * L * L * k2));
      }
    }
    for (int r = 0; r < 4; ++r) chunk_sums[r].push_back(pairwise_sum(vals[r]));
    sq_sums.push_back(pairwise_sum(sq));
  }
  const double n = static_cast<double>(samples);
  for (int r = 0; r < 4; ++r) rep.share[r] = pairwise_sum(chunk_sums[r]) / n;
  rep.total = rep.share[0] + rep.share[1] + rep.share[2] + rep.share[3];
  const double mean_sq = pairwise_sum(sq_sums) / n;
  rep.std_error = std::sqrt(std::max(mean_sq - rep.total * rep.total, 0.0) / (n - 1.0));
  rep.r2_empty = rep.count[1] == 0;
  for (int r = 0; r < 4; ++r) {
    if (rep.count[r] < 2) rep.degenerate_regions.push_back(r + 1);
  }
  return rep;
}

}  // namespace lace
