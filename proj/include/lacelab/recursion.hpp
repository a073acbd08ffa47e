#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lacelab/model.hpp"

namespace lace {

// Solution of f_{n+1}(k) = sum_{m=1}^{n+1} g_m(k) f_{n+1-m}(k) + e_{n+1}(k),
// f_0 = 1, at one z, pointwise on a k-set.
struct RecursionState {
  double z = 1.0;
  std::vector<Vec> k_set;
  int horizon = 0;
  // f[k_index][m], 0 <= m <= horizon
  std::vector<Vec> f;
  // g_1(k; z) per k, and the remaining "memory" terms
  // sum_{m >= 2} g_m f_{n-m} + e_n per (k, n); memory[k][0] is unused.
  Vec g1;
  std::vector<Vec> memory;
  // Exact values at k = 0 from the companion recursion.
  std::optional<Vec> f_at_zero;
  std::optional<Vec> laplacian0;

  double value(int m, std::size_t k_index) const { return f[k_index][static_cast<std::size_t>(m)]; }
};

// Throws HorizonError when horizon > model.n_max() and NonFiniteError
// (with the (m, k) witness) on overflow. When with_laplacian is set the
// exact k = 0 companion recursion is run too; it is silently skipped for
// extracted models whose k-set does not support the Laplacian.
RecursionState solve(const ModelSequences& model, double z, std::span<const Vec> k_set, int horizon,
                     bool with_laplacian = true);

struct ZeroData {
  Vec f;          // f_m(0; z)
  Vec laplacian;  // Laplacian of f_m at k = 0
};

// Twice-differentiated recursion at k = 0:
//   lap f_{n+1} = sum_m [lap g_m f_{n+1-m} + g_m lap f_{n+1-m}] + lap e_{n+1}.
// Gradients vanish at 0 by symmetry so no cross terms appear.
ZeroData laplacian_recursion(const ModelSequences& model, double z, int horizon);

// Richardson-extrapolated symmetric estimate 2d (F(h e_1) - F(0)) / h^2 for a
// function F invariant under coordinate sign flips and permutations.
double symmetric_laplacian_fd(const std::function<double(std::span<const double>)>& fn, int d, double h);

// Finite-difference Laplacian of f_m at k = 0 (independent of the companion
// recursion). Requires 0 < h and h * max|x| <= pi over the kernel support.
double laplacian_at_zero(const ModelSequences& model, double z, int m, double h);
// Same with the default step 1e-3 / (L sqrt(m)).
double laplacian_at_zero(const ModelSequences& model, double z, int m);

}  // namespace lace
