#include "lacelab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lacelab/error.hpp"
#include "lacelab/quadrature.hpp"
#include "lacelab/recursion.hpp"

namespace lace {

ClTProbeSet default_probes(int d) {
  ClTProbeSet set;
  Vec e1(d, 0.0);
  e1[0] = 1.0;
  set.directions.emplace_back("e1", e1);
  if (d > 1) set.directions.emplace_back("diag", Vec(d, 1.0 / std::sqrt(static_cast<double>(d))));
  return set;
}

std::vector<int> dyadic_ladder(int lo_exp, int hi_exp) {
  std::vector<int> out;
  for (int e = lo_exp; e <= hi_exp; ++e) out.push_back(1 << e);
  return out;
}

std::optional<double> ScalingProbe::max_deviation(int n) const {
  std::optional<double> best;
  for (const auto& r : rows) {
    if (r.n != n || !r.in_regime) continue;
    const double dev = std::abs(r.ratio - 1.0);
    if (!best || dev > *best) best = dev;
  }
  return best;
}

namespace {

std::optional<double> fit_decay_rate(const std::vector<int>& ns, const Vec& dev) {
  Vec x;
  Vec y;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (dev[i] > 0.0 && std::isfinite(dev[i])) {
      x.push_back(std::log(static_cast<double>(ns[i])));
      y.push_back(std::log(dev[i]));
    }
  }
  if (x.size() < 2) return std::nullopt;
  return -least_squares_line(x, y).second;
}

}  // namespace

ScalingProbe probe_clt(const ModelSequences& model, const CriticalConstants& constants,
                       const std::vector<int>& n_ladder, const ClTProbeSet& probes, double gamma) {
  const StepDistribution& kernel = model.kernel();
  const int d = kernel.dim();
  const double s2 = kernel.sigma2();
  ScalingProbe out;
  out.z_c = constants.z_c;
  out.A_used = constants.A;
  out.v_used = constants.v;
  if (!(constants.v > 0.0)) throw DegenerateError("probe_clt: v must be positive");

  std::vector<int> fit_n;
  Vec dev0;
  Vec devk;
  for (int n : n_ladder) {
    if (n < 1) throw PreconditionError("probe_clt: ladder entries must be >= 1");
    const double scale = 1.0 / std::sqrt(constants.v * s2 * n);
    const double thr = regime_threshold(gamma, n);
    std::vector<Vec> ks;
    std::vector<ProbeRow> rows;
    for (const auto& [name, dir] : probes.directions) {
      for (double mag : probes.magnitudes) {
        ProbeRow row;
        row.n = n;
        row.k_magnitude = mag;
        row.direction = name;
        row.k_scaled.resize(d);
        for (int i = 0; i < d; ++i) row.k_scaled[i] = mag * dir[i] * scale;
        ks.push_back(row.k_scaled);
        rows.push_back(std::move(row));
      }
    }
    const RecursionState st = solve(model, constants.z_c, ks, n, false);
    double r0 = std::nan("");
    double excess = 0.0;
    bool any_k = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto& row = rows[i];
      const double mag2 = row.k_magnitude * row.k_magnitude;
      row.ratio = st.f[i][n] / (constants.A * std::exp(-mag2 / (2.0 * d)));
      row.in_regime = a_of_k(kernel, row.k_scaled) <= thr;
      if (row.k_magnitude == 0.0) r0 = row.ratio;
    }
    for (const auto& row : rows) {
      if (row.k_magnitude > 0.0 && row.in_regime && std::isfinite(r0)) {
        any_k = true;
        excess = std::max(excess, std::abs(row.ratio - r0) / (row.k_magnitude * row.k_magnitude));
      }
    }
    if (!any_k) out.skipped_n.push_back(n);
    if (std::isfinite(r0)) {
      fit_n.push_back(n);
      dev0.push_back(std::abs(r0 - 1.0));
      devk.push_back(any_k ? excess : std::nan(""));
    }
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  out.theta_hat_minus_2 = fit_decay_rate(fit_n, dev0);
  out.delta_hat = fit_decay_rate(fit_n, devk);
  return out;
}

VarianceProbe probe_variance(const ModelSequences& model, const CriticalConstants& constants,
                             const std::vector<int>& n_ladder, double floor) {
  VarianceProbe out;
  if (n_ladder.empty()) return out;
  const int top = *std::max_element(n_ladder.begin(), n_ladder.end());
  const ZeroData zd = laplacian_recursion(model, constants.z_c, top);
  const double s2 = model.kernel().sigma2();
  Vec dev;
  for (int n : n_ladder) {
    if (n < 1) throw PreconditionError("probe_variance: ladder entries must be >= 1");
    const double fn = zd.f[n];
    if (!(std::abs(fn) > floor)) {
      throw DegenerateError("probe_variance: f_n(0; z_c) below floor at n = " + std::to_string(n));
    }
    const double ratio = -zd.laplacian[n] / (fn * constants.v * s2 * n);
    out.n.push_back(n);
    out.ratio.push_back(ratio);
    dev.push_back(std::abs(ratio - 1.0));
  }
  out.delta_hat = fit_decay_rate(out.n, dev);
  return out;
}

double heuristic_gaussian(double k_squared, int d, int n) {
  return std::pow(1.0 - k_squared / (2.0 * d * n), n);
}

double gaussian_limit(double k_squared, int d) { return std::exp(-k_squared / (2.0 * d)); }

}  // namespace lace
