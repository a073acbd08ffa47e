#include "lacelab/critical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "lacelab/error.hpp"

namespace lace {

SequenceState sequences(const ModelSequences& model, double z, int n) {
  if (n < 0) throw PreconditionError("sequences: n must be >= 0");
  if (n > model.n_max()) throw HorizonError("sequences: n exceeds model n_max");
  SequenceState st;
  st.z = z;
  st.b.assign(n + 1, 0.0);
  st.c.assign(n + 1, 0.0);
  st.v.assign(n + 1, 0.0);
  st.b[0] = 1.0;
  st.v[0] = 1.0;
  if (n == 0) return st;

  const Vec zero(model.kernel().dim(), 0.0);
  const int mem = std::min(n, model.memory_length());
  const Vec g = model.g_values(zero, z, mem);
  const double s2 = model.kernel().sigma2();
  CompensatedSum lap;
  CompensatedSum c;
  for (int m = 1; m <= n; ++m) {
    if (m <= mem) {
      lap.add(model.g_laplacian_at_zero(m, z));
      c.add((m - 1) * g[m - 1]);
    }
    st.b[m] = -lap.value() / s2;
    st.c[m] = c.value();
    const double denom = 1.0 + st.c[m];
    if (!(denom > 0.0)) {
      throw DegenerateError("sequences: 1 + c_n <= 0 at n = " + std::to_string(m));
    }
    st.v[m] = st.b[m] / denom;
  }
  return st;
}

ZSequence z_sequence(const ModelSequences& model, int n) {
  if (n < 0) throw PreconditionError("z_sequence: n must be >= 0");
  if (n > model.n_max()) throw HorizonError("z_sequence: n exceeds model n_max");
  ZSequence zs;
  zs.z.assign(n + 1, 1.0);
  zs.increment.assign(n + 1, 0.0);
  const Vec zero(model.kernel().dim(), 0.0);
  const int mem = model.memory_length();
  for (int j = 1; j < n; ++j) {
    const int top = std::min(j + 1, mem);
    double next = 1.0;
    if (top >= 2) {
      const Vec g = model.g_values(zero, zs.z[j], top);
      CompensatedSum s;
      for (int m = 2; m <= top; ++m) s.add(g[m - 1]);
      next = 1.0 - s.value();
    }
    if (!std::isfinite(next)) {
      throw NonFiniteError("z_sequence: non-finite z_" + std::to_string(j + 1));
    }
    zs.z[j + 1] = next;
  }
  for (int j = 1; j <= n; ++j) zs.increment[j] = std::abs(zs.z[j] - zs.z[j - 1]);
  return zs;
}

std::vector<Interval> induction_intervals(const ZSequence& zs, double K1, double beta, double theta) {
  std::vector<Interval> out(zs.z.size());
  for (std::size_t j = 1; j < zs.z.size(); ++j) {
    const double w = K1 * beta * std::pow(static_cast<double>(j), 1.0 - theta);
    out[j] = {zs.z[j] - w, zs.z[j] + w};
  }
  return out;
}

std::optional<int> first_nesting_failure(const std::vector<Interval>& intervals) {
  for (std::size_t j = 2; j < intervals.size(); ++j) {
    if (!intervals[j - 1].contains(intervals[j])) return static_cast<int>(j);
  }
  return std::nullopt;
}

double truncated_g_sum(const ModelSequences& model, int M, double z) {
  const Vec zero(model.kernel().dim(), 0.0);
  const Vec g = model.g_values(zero, z, std::min(M, model.memory_length()));
  CompensatedSum s;
  for (double x : g) s.add(x);
  return s.value();
}

namespace {

struct Bracket {
  double a, b, ra, rb;
};

// Regula falsi with the Illinois modification; bisection whenever the
// interpolated point is unusable (non-finite residuals or outside (a, b)).
double refine_root(const std::function<double(double)>& r, Bracket br, double tol, int& iterations) {
  int side = 0;
  for (iterations = 0; iterations < 400; ++iterations) {
    double x;
    const bool finite = std::isfinite(br.ra) && std::isfinite(br.rb);
    if (finite && br.ra != br.rb) {
      x = br.b - br.rb * (br.b - br.a) / (br.rb - br.ra);
    } else {
      x = 0.5 * (br.a + br.b);
    }
    if (!(x > std::min(br.a, br.b) && x < std::max(br.a, br.b))) x = 0.5 * (br.a + br.b);
    const double rx = r(x);
    if (rx == 0.0 || (std::abs(rx) <= 1e-3 * tol && std::isfinite(rx))) return x;
    if (std::signbit(rx) == std::signbit(br.rb)) {
      br.b = x;
      br.rb = rx;
      if (side == -1) br.ra *= 0.5;
      side = -1;
    } else {
      br.a = x;
      br.ra = rx;
      if (side == 1) br.rb *= 0.5;
      side = 1;
    }
    if (std::abs(br.b - br.a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
  }
  return std::abs(br.ra) < std::abs(br.rb) ? br.a : br.b;
}

}  // namespace

CriticalConstants solve_zc(const ModelSequences& model, int M, const ZcOptions& options) {
  if (M < 1) throw PreconditionError("solve_zc: M must be >= 1");
  if (M > model.n_max()) throw HorizonError("solve_zc: M exceeds model n_max");
  if (!(options.tol > 0.0)) throw PreconditionError("solve_zc: tol must be positive");

  auto residual = [&](double z) { return 1.0 - truncated_g_sum(model, M, z); };

  CriticalConstants out;
  out.M = M;

  // The z-sequence only seeds the bracket; it may leave the domain where the
  // truncated series is finite (e.g. all-negative signs).
  double z_iter = std::nan("");
  double last_increment = 0.0;
  try {
    const ZSequence zs = z_sequence(model, M);
    z_iter = zs.z.back();
    last_increment = zs.increment.back();
  } catch (const NonFiniteError&) {
  }
  double w = options.bracket_half_width;
  Interval bracket{std::max(1.0 - w, 1e-12), 1.0 + w};
  out.bracket = bracket;

  double zc = z_iter;
  double r_iter = std::isfinite(z_iter) && bracket.contains(z_iter) ? residual(z_iter) : std::nan("");
  if (r_iter == 0.0) {
    zc = z_iter;
  } else {
    std::vector<std::pair<double, double>> sampled;
    auto try_bracket = [&](double a, double b) -> std::optional<Bracket> {
      const double ra = residual(a);
      const double rb = residual(b);
      sampled.emplace_back(a, ra);
      sampled.emplace_back(b, rb);
      if (std::isnan(ra) || std::isnan(rb)) return std::nullopt;
      if (ra == 0.0) return Bracket{a, a, 0.0, 0.0};
      if (rb == 0.0) return Bracket{b, b, 0.0, 0.0};
      if (std::signbit(ra) != std::signbit(rb)) return Bracket{a, b, ra, rb};
      return std::nullopt;
    };

    std::optional<Bracket> br;
    if (std::isfinite(r_iter)) {
      // Tight bracket around the iterate of the z-sequence first.
      const double step = std::max(1e-8, 10.0 * last_increment);
      const double a = std::max(bracket.lo, z_iter - step);
      const double b = std::min(bracket.hi, z_iter + step);
      if (a < b) br = try_bracket(a, b);
    }
    if (!br) br = try_bracket(bracket.lo, bracket.hi);
    if (!br) {
      w *= 2.0;
      bracket = {std::max(1.0 - w, 1e-12), 1.0 + w};
      out.bracket = bracket;
      out.bracket_widened = true;
      br = try_bracket(bracket.lo, bracket.hi);
    }
    if (!br) {
      std::ostringstream os;
      os << "no root in interval [" << bracket.lo << ", " << bracket.hi << "]; sampled residuals:";
      for (const auto& [z, r] : sampled) os << " r(" << z << ")=" << r;
      throw NoRootError(os.str());
    }
    zc = br->a == br->b ? br->a : refine_root(residual, *br, options.tol, out.iterations);
  }

  out.z_c = zc;
  out.residual = std::abs(residual(zc));
  if (!(out.residual <= options.tol)) {
    throw NoRootError("solve_zc: residual " + std::to_string(out.residual) + " above tolerance");
  }

  const Vec zero(model.kernel().dim(), 0.0);
  const int mem = std::min(M, model.memory_length());
  const Vec g = model.g_values(zero, zc, mem);
  const Vec e = model.e_values(zero, zc, M);
  CompensatedSum mg, lap, es;
  for (int m = 1; m <= mem; ++m) {
    mg.add(m * g[m - 1]);
    lap.add(model.g_laplacian_at_zero(m, zc));
  }
  for (double x : e) es.add(x);
  if (mg.value() == 0.0) throw DegenerateError("solve_zc: sum m g_m(0; z_c) vanishes");
  out.A = (1.0 + es.value()) / mg.value();
  out.v = -lap.value() / (model.kernel().sigma2() * mg.value());
  out.tail_estimate = model.tail_estimate(M, zc);
  return out;
}

}  // namespace lace
