#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lacelab/numeric.hpp"

namespace lace {

struct Site {
  std::vector<int> x;
  double mass = 0.0;
  // Exact mass num/den when known (den == 0 means "not rational").
  std::int64_t num = 0;
  std::int64_t den = 0;
};

// A finitely supported, lattice-symmetric step distribution D on Z^d.
//
// The Fourier transform is always evaluated in cosine form on the
// canonicalised frequency (absolute values, sorted), so values are exactly
// invariant under sign flips and permutations of k.
class StepDistribution {
 public:
  StepDistribution() = default;

  // Builds from explicit support. Validates nonnegativity, normalisation
  // (to 1e-12) and symmetry under sign flips and coordinate permutations.
  StepDistribution(int dim, int range, std::vector<Site> support);

  int dim() const { return dim_; }
  int range() const { return range_; }
  const std::vector<Site>& support() const { return support_; }
  double sigma2() const { return sigma2_; }
  double max_mass() const { return max_mass_; }
  bool is_box() const { return box_; }
  bool includes_origin() const { return include_origin_; }

  // Order of the extra moment (2 + 2 eps moments). Finite support makes every
  // eps admissible; the value is only carried for reporting.
  double moment_eps() const { return moment_eps_; }
  void set_moment_eps(double eps) { moment_eps_ = eps; }

  // ||D||_inf * L^d, the empirical constant in ||D||_inf <= C L^{-d}.
  double max_mass_ratio() const;
  // sum_x D(x)^2, equal to the Haar integral of D-hat^2.
  double l2_norm_squared() const;

  // "d:L" or "d:L:include-origin".
  std::string spec_string() const;

  friend StepDistribution make_uniform_box(int d, int L, bool include_origin);

 private:
  int dim_ = 0;
  int range_ = 0;
  std::vector<Site> support_;
  double sigma2_ = 0.0;
  double max_mass_ = 0.0;
  double moment_eps_ = 0.25;
  bool box_ = false;
  bool include_origin_ = false;
};

// Uniform distribution on {x : 0 < ||x||_inf <= L}, or on the whole box
// {||x||_inf <= L} when include_origin is set.
StepDistribution make_uniform_box(int d, int L, bool include_origin = false);

// Parses "d:L[:include-origin]".
StepDistribution parse_kernel_spec(const std::string& spec);

// |k| sorted ascending. Every symmetric function of k depends only on this.
Vec canonical_frequency(std::span<const double> k);

double fourier(const StepDistribution& dist, std::span<const double> k);
// Same cosine form in extended precision.
long double fourier_extended(const StepDistribution& dist, std::span<const double> k);
double a_of_k(const StepDistribution& dist, std::span<const double> k);
double moment(const StepDistribution& dist, double order);

struct AssumptionDReport {
  double eta = 0.0;
  double eta_bound2 = 0.0;  // min a(k) over ||k||_inf >= 1/L
  double eta_bound3 = 0.0;  // 2 - max a(k) over all samples
  double c1 = 0.0;
  double c2 = 0.0;
  bool holds_bound1 = false;
  bool holds_bound2 = false;
  bool holds_bound3 = false;
  Vec worst_k;
  double max_mass_ratio = 0.0;
  double sigma2_ratio = 0.0;  // sigma^2 / L^2
  std::size_t small_count = 0;
  std::size_t large_count = 0;

  bool holds() const { return holds_bound1 && holds_bound2 && holds_bound3; }
};

// Sample-based check of the three bounds on a(k). Throws
// RegimeUncoveredError when either regime (||k||_inf <= 1/L with k != 0, or
// ||k||_inf >= 1/L) has no samples.
AssumptionDReport check_assumption_d(const StepDistribution& dist,
                                     std::span<const Vec> k_samples);

// k-sample generators.
Vec log_spaced(double lo, double hi, int count);
std::vector<Vec> axis_rays(int d, std::span<const double> magnitudes);
// Rays along (1,...,1)/sqrt(d); magnitudes are Euclidean lengths, clipped so
// every component stays within pi.
std::vector<Vec> diagonal_rays(int d, std::span<const double> magnitudes);
// Midpoint tensor grid with n points per axis on [-pi, pi]^d (d <= 3 only).
std::vector<Vec> tensor_grid(int d, int n);
// Axis and diagonal rays with log-spaced magnitudes in [1e-3/L, pi] plus a
// linear sweep of the axis up to pi.
std::vector<Vec> default_k_samples(const StepDistribution& dist, int count = 48);

}  // namespace lace
