#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacelab/critical.hpp"
#include "lacelab/model.hpp"
#include "lacelab/quadrature.hpp"
#include "lacelab/recursion.hpp"

namespace lace {

// Exponents and constants of the inductive analysis.
struct InductionParams {
  double theta = 2.5;
  double eps = 0.4;
  double gamma = 0.3;
  double delta = 0.05;
  double lambda = 2.3;
  double p_star = 2.0;
  std::vector<double> B{2.0};
  double beta = 1.0;  // L^{-d / p_star}

  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 0.0;
  double K5 = 0.0;
  std::optional<double> K4p;
  // Values C_e(c K4), C_g(c K4) when known; they feed K4' = max{C_e, C_g, K4}
  // and are the supplied constants for the E and G checks.
  std::optional<double> C_e;
  std::optional<double> C_g;
  // Constant K of the a-priori f-bounds.
  std::optional<double> K_f;
  // c inside K4' and the generic C of the consequence bounds.
  double c_K4 = 1.0;
  double C = 1.0;
  // ">>" threshold: a >> b means a / b >= gg_ratio.
  double gg_ratio = 10.0;

  bool has_constants() const { return K1 > 0.0 || K2 > 0.0 || K3 > 0.0 || K4 > 0.0 || K5 > 0.0; }
  // K4' as supplied, else max{C_e, C_g, K4}.
  double K4_prime() const;
};

double beta_for(int L, int d, double p_star);

// Each returned string names one violated inequality, e.g. "λ < θ violated".
std::vector<std::string> exponent_violations(const InductionParams& p);
std::vector<std::string> ordering_violations(const InductionParams& p);
// Throws ConfigError naming the first violated inequality.
void validate(const InductionParams& p);

struct Witness {
  int index = 0;  // m, j or i depending on the bound
  Vec k;
  double z = 0.0;
};

struct BoundReport {
  std::string bound_id;
  double empirical_constant = 0.0;
  std::optional<double> supplied_constant;
  bool passes = true;
  Witness witness;
  std::size_t tested_count = 0;
  std::string note;
};

struct CheckGrid {
  std::vector<int> ms;
  std::vector<Vec> ks;
  Vec zs;
};

// Tracks max |lhs| / envelope; the first point attaining the maximum keeps
// the witness. Points with lhs == 0 and envelope == 0 are skipped.
class RatioMax {
 public:
  explicit RatioMax(std::string id) { report_.bound_id = std::move(id); }
  void observe(double lhs, double envelope, int index, std::span<const double> k, double z);
  BoundReport finish(std::optional<double> supplied, std::string note = {}) const;

 private:
  BoundReport report_;
  bool any_ = false;
};

std::vector<BoundReport> check_f_bounds(const RecursionState& state, const StepDistribution& kernel,
                                        const InductionParams& params, std::span<const NormEstimate> norms);

std::vector<BoundReport> check_assumption_e(const ModelSequences& model, const InductionParams& params,
                                            const CheckGrid& grid);

std::vector<BoundReport> check_assumption_g(const ModelSequences& model, const InductionParams& params,
                                            const CheckGrid& grid, std::span<const double> eps_primes);

struct H3Remainders {
  // r[k_index][i], 1 <= i <= horizon (index 0 unused)
  std::vector<Vec> r;
  Vec a;  // a(k) per k
  // Largest i such that the factors 1..i are all defined.
  std::vector<int> defined_upto;
};

enum class FloorPolicy { throw_on_violation, record };

// r_i(k) = f_i(k) / f_{i-1}(k) - 1 + v_i a(k), with the ratio evaluated as
// g_1(k) + memory_i(k) / f_{i-1}(k).
H3Remainders extract_h3_remainders(const RecursionState& state, const StepDistribution& kernel,
                                   const SequenceState& seq, double ratio_floor = 1e-12,
                                   FloorPolicy policy = FloorPolicy::throw_on_violation);

// prod_{i <= j} (1 - v_i a(k) + r_i(k))
double h3_product(const H3Remainders& rem, const SequenceState& seq, std::size_t k_index, int j);

struct RegimeCounts {
  std::size_t h3_points = 0;
  std::size_t h4_points = 0;
  std::vector<int> empty_h3_at;  // j with no k != 0 in the factorised regime
};

std::vector<BoundReport> check_h1_h4(const ModelSequences& model, const RecursionState& state,
                                     const SequenceState& seq, const InductionParams& params,
                                     RegimeCounts* regimes = nullptr);

std::vector<BoundReport> check_consequences(const ModelSequences& model, const RecursionState& state,
                                            const SequenceState& seq, const InductionParams& params,
                                            std::span<const NormEstimate> norms, const CheckGrid& grid,
                                            std::span<const double> eps_primes);

struct RegionReport {
  int j = 0;
  double p = 1.0;
  std::array<double, 4> share{};  // contribution of R1..R4 to the p-th power of the norm
  std::array<std::size_t, 4> count{};
  double total = 0.0;
  double std_error = 0.0;
  double threshold = 0.0;  // gamma log j / j
  // max over R1 of (D-hat^2 |f_j|)^p exp(c p j (L|k|)^2)
  double r1_envelope_constant = 0.0;
  double gaussian_rate = 0.0;
  bool r2_empty = true;
  std::vector<int> degenerate_regions;  // regions with fewer than 2 samples
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

int classify_region(double a, double k_inf, double threshold, double inv_L);

// Monte Carlo split of ||D-hat^2 f_j||_p^p over the regions
// R1: a <= thr, ||k|| <= 1/L;  R2: a <= thr, ||k|| > 1/L;
// R3: a > thr, ||k|| <= 1/L;   R4: a > thr, ||k|| > 1/L.
RegionReport region_decomposition(const ModelSequences& model, double z, int j, double p,
                                  const InductionParams& params, std::uint64_t samples, std::uint64_t seed,
                                  double gaussian_rate);

bool all_pass(std::span<const BoundReport> reports);

}  // namespace lace
