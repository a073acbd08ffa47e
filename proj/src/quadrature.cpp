#include "lacelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lacelab/error.hpp"
#include "lacelab/recursion.hpp"

namespace lace {

namespace {

constexpr std::size_t kChunk = 2048;

// Running per-(m, p) accumulator: chunk sums are kept and reduced pairwise
// at the end, so the result depends only on the point order.
struct Accumulator {
  Vec chunk_sum;
  Vec chunk_sq;
  Vec cur;
  Vec cur_sq;

  void flush() {
    chunk_sum.push_back(pairwise_sum(cur));
    chunk_sq.push_back(pairwise_sum(cur_sq));
    cur.clear();
    cur_sq.clear();
  }
};

}  // namespace

std::string to_string(QuadMethod method) {
  return method == QuadMethod::grid ? "grid" : "monte_carlo";
}

QuadMethod parse_quad_method(const std::string& s) {
  if (s == "grid") return QuadMethod::grid;
  if (s == "monte_carlo" || s == "mc") return QuadMethod::monte_carlo;
  throw ConfigError("unknown quadrature method '" + s + "'");
}

Vec TorusSampler::next() {
  Vec k(d_);
  for (auto& c : k) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    c = std::numbers::pi * (2.0 * u - 1.0);
  }
  return k;
}

std::uint64_t default_mc_samples(int j) {
  return static_cast<std::uint64_t>(1e5 * (1.0 + std::log(static_cast<double>(std::max(j, 1)))));
}

std::vector<NormEstimate> lp_norms(const ModelSequences& model, double z, std::span<const int> ms,
                                   std::span<const double> ps, const QuadratureSpec& spec) {
  if (ms.empty() || ps.empty()) return {};
  for (double p : ps) {
    if (!(p >= 1.0)) throw PreconditionError("lp_norm: p >= 1 required");
  }
  int max_m = 0;
  for (int m : ms) {
    if (m < 0) throw PreconditionError("lp_norm: m must be >= 0");
    max_m = std::max(max_m, m);
  }
  if (max_m > model.n_max()) throw HorizonError("lp_norm: m exceeds model n_max");

  const int d = model.kernel().dim();
  const std::size_t np = ps.size();
  const std::size_t slots = ms.size() * np;
  std::vector<Accumulator> acc(slots);

  std::uint64_t total = 0;
  std::vector<int> grid_idx;
  int half = 0;
  TorusSampler sampler(d, spec.seed);
  if (spec.method == QuadMethod::grid) {
    if (spec.grid_n < 2 || spec.grid_n % 2 != 0) {
      throw PreconditionError("lp_norm: grid resolution must be a positive even number");
    }
    if (d > 3) throw PreconditionError("lp_norm: tensor grids are limited to d <= 3; use monte_carlo");
    half = spec.grid_n / 2;
    const double pts = std::pow(static_cast<double>(half), d);
    if (pts > spec.budget) {
      throw BudgetError("lp_norm: grid needs " + std::to_string(pts) + " evaluations, budget " +
                        std::to_string(spec.budget));
    }
    total = static_cast<std::uint64_t>(pts);
    grid_idx.assign(d, 0);
  } else {
    if (spec.samples < 2) throw PreconditionError("lp_norm: need at least 2 Monte Carlo samples");
    if (static_cast<double>(spec.samples) > spec.budget) {
      throw BudgetError("lp_norm: Monte Carlo sample count exceeds budget");
    }
    total = spec.samples;
  }

  const double h = std::numbers::pi / half;
  std::vector<Vec> chunk;
  chunk.reserve(kChunk);
  std::uint64_t produced = 0;
  while (produced < total) {
    chunk.clear();
    while (chunk.size() < kChunk && produced < total) {
      if (spec.method == QuadMethod::grid) {
        Vec k(d);
        for (int i = 0; i < d; ++i) k[i] = (grid_idx[i] + 0.5) * h;
        chunk.push_back(std::move(k));
        int i = 0;
        while (i < d && grid_idx[i] == half - 1) grid_idx[i++] = 0;
        if (i < d) ++grid_idx[i];
      } else {
        chunk.push_back(sampler.next());
      }
      ++produced;
    }
    const RecursionState st = solve(model, z, chunk, max_m, false);
    for (std::size_t ki = 0; ki < chunk.size(); ++ki) {
      const double dhat = fourier(model.kernel(), chunk[ki]);
      const double d2 = dhat * dhat;
      for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const double base = std::abs(d2 * st.f[ki][static_cast<std::size_t>(ms[mi])]);
        for (std::size_t pi = 0; pi < np; ++pi) {
          const double val = ps[pi] == 1.0 ? base : std::pow(base, ps[pi]);
          auto& a = acc[mi * np + pi];
          a.cur.push_back(val);
          a.cur_sq.push_back(val * val);
        }
      }
    }
    for (auto& a : acc) a.flush();
  }

  std::vector<NormEstimate> out;
  out.reserve(slots);
  const double n = static_cast<double>(total);
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    for (std::size_t pi = 0; pi < np; ++pi) {
      const auto& a = acc[mi * np + pi];
      const double mean = pairwise_sum(a.chunk_sum) / n;
      NormEstimate est;
      est.p = ps[pi];
      est.m = ms[mi];
      est.value = std::pow(std::max(mean, 0.0), 1.0 / est.p);
      est.method = spec.method;
      est.sample_count = total;
      if (spec.method == QuadMethod::monte_carlo) {
        est.seed = spec.seed;
        const double mean_sq = pairwise_sum(a.chunk_sq) / n;
        const double var = std::max(mean_sq - mean * mean, 0.0) * n / (n - 1.0);
        const double se_mean = std::sqrt(var / n);
        // delta method for x -> x^{1/p}
        est.std_error = mean > 0.0 ? se_mean * std::pow(mean, 1.0 / est.p - 1.0) / est.p : se_mean;
      }
      out.push_back(est);
    }
  }
  return out;
}

NormEstimate lp_norm(const ModelSequences& model, double z, int m, double p, const QuadratureSpec& spec) {
  const int ms[] = {m};
  const double ps[] = {p};
  return lp_norms(model, z, ms, ps, spec).front();
}

double expected_decay_exponent(int d, double p, double theta) {
  return std::min(d / (2.0 * p), theta);
}

std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw FitError("least squares: abscissae are all equal");
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

DecayFit decay_fit(std::span<const NormEstimate> norms, std::optional<double> expected_slope) {
  if (norms.size() < 8) throw FitError("decay_fit: need at least 8 values of m");
  int lo = norms.front().m;
  int hi = norms.front().m;
  Vec x;
  Vec y;
  for (const auto& n : norms) {
    if (!(n.value > 0.0)) throw FitError("decay_fit: nonpositive norm value at m = " + std::to_string(n.m));
    if (n.m < 1) throw FitError("decay_fit: m must be >= 1");
    lo = std::min(lo, n.m);
    hi = std::max(hi, n.m);
    x.push_back(std::log(static_cast<double>(n.m)));
    y.push_back(std::log(n.value));
  }
  if (hi < 4 * lo) throw FitError("decay_fit: m values must span at least two octaves");
  const auto [a, b] = least_squares_line(x, y);
  DecayFit fit;
  fit.slope = b;
  fit.amplitude = std::exp(a);
  fit.points = norms.size();
  if (expected_slope) {
    fit.expected_slope = expected_slope;
    fit.deviation = b - *expected_slope;
  }
  return fit;
}

}  // namespace lace
