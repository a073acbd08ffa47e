#include "lacelab/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lacelab/error.hpp"

namespace lace {

RecursionState solve(const ModelSequences& model, double z, std::span<const Vec> k_set, int horizon,
                     bool with_laplacian) {
  if (horizon < 0) throw PreconditionError("solve: horizon must be >= 0");
  if (horizon > model.n_max()) {
    throw HorizonError("solve: horizon " + std::to_string(horizon) + " exceeds model n_max " +
                       std::to_string(model.n_max()));
  }
  if (!(z > 0.0)) throw PreconditionError("solve: z must be positive");

  RecursionState st;
  st.z = z;
  st.k_set.assign(k_set.begin(), k_set.end());
  st.horizon = horizon;
  st.f.resize(k_set.size());
  st.memory.resize(k_set.size());
  st.g1.resize(k_set.size(), 0.0);

  const int mem = std::min(horizon, model.memory_length());
  for (std::size_t ki = 0; ki < k_set.size(); ++ki) {
    const auto& k = k_set[ki];
    Vec& f = st.f[ki];
    Vec& memory = st.memory[ki];
    f.assign(horizon + 1, 0.0);
    memory.assign(horizon + 1, 0.0);
    f[0] = 1.0;
    if (horizon == 0) continue;

    if (auto gx = model.g_values_extended(k, z, std::max(mem, 1))) {
      // Extracted coefficients: e = 0 and the sums run in extended precision.
      ExtendedVec fx(horizon + 1);
      fx[0] = 1;
      st.g1[ki] = static_cast<double>((*gx)[0]);
      for (int n = 1; n <= horizon; ++n) {
        Extended s = 0;
        const int top = std::min(n, mem);
        for (int m = 2; m <= top; ++m) s += (*gx)[m - 1] * fx[n - m];
        memory[n] = static_cast<double>(s);
        fx[n] = s + (*gx)[0] * fx[n - 1];
        f[n] = static_cast<double>(fx[n]);
        if (!std::isfinite(f[n])) {
          throw NonFiniteError("solve: non-finite f_" + std::to_string(n) + " at k index " + std::to_string(ki));
        }
      }
      continue;
    }
    const Vec g = model.g_values(k, z, std::max(mem, 1));
    const Vec e = model.e_values(k, z, horizon);
    st.g1[ki] = g[0];
    // Long-double accumulation: for z > 1 the values grow like z^n and the
    // rounding of g_1 would otherwise be amplified n-fold.
    const long double g1 = model.g1_extended(k, z);
    std::vector<long double> fx(horizon + 1, 0.0L);
    fx[0] = 1.0L;
    for (int n = 1; n <= horizon; ++n) {
      long double s = e[n - 1];
      const int top = std::min(n, mem);
      for (int m = 2; m <= top; ++m) s += static_cast<long double>(g[m - 1]) * fx[n - m];
      memory[n] = static_cast<double>(s);
      fx[n] = s + g1 * fx[n - 1];
      f[n] = static_cast<double>(fx[n]);
      if (!std::isfinite(f[n])) {
        throw NonFiniteError("solve: non-finite f_" + std::to_string(n) + " at k index " + std::to_string(ki));
      }
    }
  }

  if (with_laplacian && horizon >= 1) {
    try {
      ZeroData zd = laplacian_recursion(model, z, horizon);
      st.f_at_zero = std::move(zd.f);
      st.laplacian0 = std::move(zd.laplacian);
    } catch (const IncompleteInputError&) {
      // extracted model without the k-points needed for its Laplacian
    }
  }
  return st;
}

ZeroData laplacian_recursion(const ModelSequences& model, double z, int horizon) {
  if (horizon > model.n_max()) throw HorizonError("laplacian_recursion: horizon exceeds model n_max");
  const Vec zero(model.kernel().dim(), 0.0);
  const int mem = std::min(horizon, model.memory_length());
  ZeroData out;
  out.f.assign(horizon + 1, 0.0);
  out.laplacian.assign(horizon + 1, 0.0);
  out.f[0] = 1.0;
  if (horizon == 0) return out;

  const Vec g = model.g_values(zero, z, std::max(mem, 1));
  const Vec e = model.e_values(zero, z, horizon);
  Vec lg(std::max(mem, 1));
  for (int m = 1; m <= std::max(mem, 1); ++m) lg[m - 1] = model.g_laplacian_at_zero(m, z);
  Vec le(horizon);
  for (int m = 1; m <= horizon; ++m) le[m - 1] = model.e_laplacian_at_zero(m, z);

  for (int n = 1; n <= horizon; ++n) {
    CompensatedSum fs;
    CompensatedSum ls;
    const int top = std::min(n, std::max(mem, 1));
    for (int m = 1; m <= top; ++m) {
      fs.add(g[m - 1] * out.f[n - m]);
      ls.add(lg[m - 1] * out.f[n - m]);
      ls.add(g[m - 1] * out.laplacian[n - m]);
    }
    fs.add(e[n - 1]);
    ls.add(le[n - 1]);
    out.f[n] = fs.value();
    out.laplacian[n] = ls.value();
    if (!std::isfinite(out.f[n]) || !std::isfinite(out.laplacian[n])) {
      throw NonFiniteError("laplacian_recursion: non-finite value at m = " + std::to_string(n));
    }
  }
  return out;
}

double symmetric_laplacian_fd(const std::function<double(std::span<const double>)>& fn, int d, double h) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step h must be positive");
  const Vec zero(d, 0.0);
  const double f0 = fn(zero);
  auto estimate = [&](double t) {
    Vec k(d, 0.0);
    k[0] = t;
    return 2.0 * d * (fn(k) - f0) / (t * t);
  };
  const double coarse = estimate(h);
  const double fine = estimate(h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

double laplacian_at_zero(const ModelSequences& model, double z, int m, double h) {
  if (!(h > 0.0)) throw PreconditionError("laplacian_at_zero: h must be positive");
  if (m < 0) throw PreconditionError("laplacian_at_zero: m must be >= 0");
  int xmax = 0;
  for (const auto& site : model.kernel().support()) {
    for (int c : site.x) xmax = std::max(xmax, std::abs(c));
  }
  if (h * xmax > std::numbers::pi) {
    throw PreconditionError("laplacian_at_zero: h * max|x| must not exceed pi");
  }
  if (m == 0) return 0.0;
  const int d = model.kernel().dim();
  return symmetric_laplacian_fd(
      [&](std::span<const double> k) {
        const std::vector<Vec> ks{Vec(k.begin(), k.end())};
        return solve(model, z, ks, m, false).f[0][static_cast<std::size_t>(m)];
      },
      d, h);
}

double laplacian_at_zero(const ModelSequences& model, double z, int m) {
  return laplacian_at_zero(model, z, m, model.k_step(m));
}

}  // namespace lace
