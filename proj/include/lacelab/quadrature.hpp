#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lacelab/model.hpp"

namespace lace {

enum class QuadMethod { grid, monte_carlo };

std::string to_string(QuadMethod method);
QuadMethod parse_quad_method(const std::string& s);

// (integral over [-pi, pi]^d of |D-hat(k)^2 f_m(k)|^p dk / (2 pi)^d)^{1/p}
struct NormEstimate {
  double p = 1.0;
  int m = 0;
  double value = 0.0;
  double std_error = 0.0;  // zero for the grid rule
  QuadMethod method = QuadMethod::grid;
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
};

struct QuadratureSpec {
  QuadMethod method = QuadMethod::grid;
  // Midpoint points per axis on [-pi, pi]; must be even (the rule folds onto
  // [0, pi]^d by sign-flip symmetry).
  int grid_n = 256;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  // Maximum number of integrand points.
  double budget = 2e7;
};

// Norms for every (m, p) pair from one sweep over the quadrature points.
// Results are ordered by m, then by p in the given order.
std::vector<NormEstimate> lp_norms(const ModelSequences& model, double z, std::span<const int> ms,
                                   std::span<const double> ps, const QuadratureSpec& spec);

NormEstimate lp_norm(const ModelSequences& model, double z, int m, double p, const QuadratureSpec& spec);

// Default Monte Carlo sample count for time index j: 1e5 (1 + log j).
std::uint64_t default_mc_samples(int j);

// Uniform points on [-pi, pi]^d. The raw mt19937_64 stream is mapped to
// doubles by hand (53 high bits), so samples are identical across standard
// libraries.
class TorusSampler {
 public:
  TorusSampler(int d, std::uint64_t seed) : d_(d), rng_(seed) {}
  Vec next();

 private:
  int d_;
  std::mt19937_64 rng_;
};

// (d / 2p) wedge theta
double expected_decay_exponent(int d, double p, double theta);

struct DecayFit {
  double slope = 0.0;
  double amplitude = 0.0;  // exp(intercept)
  std::optional<double> expected_slope;
  std::optional<double> deviation;  // slope - expected_slope
  std::size_t points = 0;
};

// Least-squares fit of log value against log m. Needs >= 8 points spanning
// at least two octaves and strictly positive values (FitError otherwise).
DecayFit decay_fit(std::span<const NormEstimate> norms, std::optional<double> expected_slope = std::nullopt);

// Plain least squares y = a + b x; returns {a, b}.
std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y);

}  // namespace lace
