#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lacelab/critical.hpp"
#include "lacelab/model.hpp"

namespace lace {

struct ClTProbeSet {
  // Named unit directions, e.g. {"e1", (1,0,...)} and {"diag", (1,...,1)/sqrt(d)}.
  std::vector<std::pair<std::string, Vec>> directions;
  Vec magnitudes{0.0, 0.5, 1.0, 2.0};
};

ClTProbeSet default_probes(int d);
std::vector<int> dyadic_ladder(int lo_exp = 6, int hi_exp = 12);

struct ProbeRow {
  int n = 0;
  double k_magnitude = 0.0;
  std::string direction;
  Vec k_scaled;  // k / sqrt(v sigma^2 n)
  double ratio = 0.0;  // f_n(k_scaled; z_c) / (A exp(-|k|^2 / 2d))
  bool in_regime = false;
};

// Rows for every (n, probe); ratios outside the uniformity regime are still
// recorded but flagged. The two fitted exponents come from a modelling
// choice: the k = 0 column gives theta_hat - 2, the k-dependent excess
// (ratio(k) - ratio(0)) / |k|^2 gives delta_hat.
struct ScalingProbe {
  double z_c = 1.0;
  double A_used = 1.0;
  double v_used = 1.0;
  std::vector<ProbeRow> rows;
  std::vector<int> skipped_n;  // regime empty apart from k = 0
  std::optional<double> theta_hat_minus_2;
  std::optional<double> delta_hat;

  // max |ratio - 1| over in-regime rows at this n (nullopt if none).
  std::optional<double> max_deviation(int n) const;
};

ScalingProbe probe_clt(const ModelSequences& model, const CriticalConstants& constants,
                       const std::vector<int>& n_ladder, const ClTProbeSet& probes, double gamma);

struct VarianceProbe {
  std::vector<int> n;
  Vec ratio;  // -lap f_n(0) / (f_n(0) v sigma^2 n)
  std::optional<double> delta_hat;
};

// Throws DegenerateError when |f_n(0; z_c)| falls below `floor`.
VarianceProbe probe_variance(const ModelSequences& model, const CriticalConstants& constants,
                             const std::vector<int>& n_ladder, double floor = 1e-300);

// (1 - |k|^2 / (2 d n))^n, the naive random-walk approximation at z = 1.
double heuristic_gaussian(double k_squared, int d, int n);
double gaussian_limit(double k_squared, int d);

}  // namespace lace
