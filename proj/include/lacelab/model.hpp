#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacelab/kernel.hpp"

namespace lace {

enum class ModelKind { simple_random_walk, synthetic_theta, weakly_saw, extracted };
enum class SignPattern { plus, minus, alternating };

std::string to_string(ModelKind kind);
std::string to_string(SignPattern signs);
ModelKind parse_model_kind(const std::string& s);
// Accepts "+", "-", "alt" (and the unicode minus).
SignPattern parse_sign_pattern(const std::string& s);

// The m-th sign of a pattern: +1, -1, or (-1)^m.
int sign_of(SignPattern signs, int m);

inline constexpr int kDefaultHorizonCap = 1 << 14;
inline constexpr double kDefaultEnumerationBudget = 1e8;

struct SyntheticSpec {
  double theta = 2.5;
  double beta0 = 0.0;    // amplitude of g_m, m >= 2
  double beta0_e = 0.0;  // amplitude of e_m, m >= 2
  SignPattern signs = SignPattern::plus;
};

// Values f_m(k; z), 0 <= m <= horizon, on a finite k-set at one z.
struct FTable {
  double z = 1.0;
  std::vector<Vec> k_set;
  // values[k_index][m]
  std::vector<Vec> values;

  int horizon() const { return values.empty() ? -1 : static_cast<int>(values.front().size()) - 1; }
};

// Endpoint measure of all n-step walks, n = 0..n_max, at z = 1:
// W_n(x) = sum over walks ending at x of the path weight.
struct WalkEnumeration {
  int n_max = 0;
  double u = 0.0;
  std::uint64_t path_steps = 0;
  // endpoints[n] = (site, weight) pairs, sorted by site.
  std::vector<std::vector<std::pair<std::vector<int>, double>>> endpoints;
};

// Exact enumeration of weakly self-avoiding D-walks. Throws BudgetError when
// sum_{n <= n_max} |support|^n exceeds `budget` path-steps.
WalkEnumeration enumerate_walks(const StepDistribution& kernel, double u, int n_max,
                                double budget = kDefaultEnumerationBudget);

// f_n(k; z) = z^n sum_x W_n(x) cos(k.x) for every n <= n_max and k.
FTable walk_f_table(const WalkEnumeration& walks, std::span<const Vec> k_set, double z);

FTable enumerate_weakly_saw(const StepDistribution& kernel, double u, int n_max,
                            std::span<const Vec> k_set, double z,
                            double budget = kDefaultEnumerationBudget);

// Coefficient provider for the recursion f_{n+1} = sum g_m f_{n+1-m} + e_{n+1}.
//
// Immutable after construction; queries are pure. The weakly-SAW kind keeps
// an internal cache of deconvolved coefficients keyed by canonical frequency.
class ModelSequences {
 public:
  static ModelSequences simple_random_walk(StepDistribution kernel, int n_max = kDefaultHorizonCap);
  static ModelSequences synthetic(StepDistribution kernel, SyntheticSpec spec,
                                  int n_max = kDefaultHorizonCap);
  static ModelSequences weakly_saw(StepDistribution kernel, double u, int n_max,
                                   double budget = kDefaultEnumerationBudget);
  // Extraction with the convention e = 0. Tables may be given at several z
  // (same horizon each); queries are only answered at those z.
  static ModelSequences extracted(StepDistribution kernel, std::span<const FTable> tables,
                                  int horizon);

  ModelKind kind() const { return kind_; }
  const StepDistribution& kernel() const { return *kernel_; }
  int n_max() const { return n_max_; }
  const SyntheticSpec& synthetic_spec() const { return synthetic_; }
  double interaction() const { return u_; }

  // Largest m for which g_m can be nonzero.
  int memory_length() const;

  double g(int m, std::span<const double> k, double z) const;
  double e(int m, std::span<const double> k, double z) const;

  // g_1..g_n and e_1..e_n at one (k, z); index 0 holds m = 1.
  Vec g_values(std::span<const double> k, double z, int n) const;
  Vec e_values(std::span<const double> k, double z, int n) const;
  // g_1(k; z) in extended precision (closed-form kinds only; others round).
  long double g1_extended(std::span<const double> k, double z) const;
  // Extracted kinds keep their coefficients in extended precision so that a
  // round trip through the recursion is not limited by the conditioning of
  // the deconvolution; nullopt for the other kinds.
  std::optional<ExtendedVec> g_values_extended(std::span<const double> k, double z, int n) const;

  double g_laplacian_at_zero(int m, double z) const;
  double e_laplacian_at_zero(int m, double z) const;
  double g_z_derivative_at_zero(int m, double z) const;

  // Step sizes for the finite-difference paths.
  static constexpr double kZStep = 1e-4;
  double k_step(int m) const;

  // Per-kind bound on sum_{m > M} m |g_m(0; z)| (synthetic: integral
  // estimate); nullopt when the kind gives no handle on the tail.
  std::optional<double> tail_estimate(int M, double z) const;

 private:
  struct Cached;
  ModelSequences() = default;

  void check_index(int m) const;
  void check_query(int m, std::span<const double> k, double z) const;
  const Vec& cached_g_unit(std::span<const double> k) const;
  const ExtendedVec& extracted_g(std::span<const double> k, double z) const;

  ModelKind kind_ = ModelKind::simple_random_walk;
  std::shared_ptr<const StepDistribution> kernel_;
  int n_max_ = 0;
  SyntheticSpec synthetic_;
  double u_ = 0.0;
  std::shared_ptr<const WalkEnumeration> walks_;
  // extracted: per z, canonical k -> g_1..g_H
  std::shared_ptr<const std::map<double, std::map<Vec, ExtendedVec>>> extracted_;
  std::shared_ptr<Cached> cache_;
};

struct CoefficientQuery {
  int m = 1;
  Vec k;
  double z = 1.0;
};

inline double g(const ModelSequences& model, const CoefficientQuery& q) { return model.g(q.m, q.k, q.z); }
inline double e(const ModelSequences& model, const CoefficientQuery& q) { return model.e(q.m, q.k, q.z); }

// Inverts the recursion with e = 0: g_m = f_m - sum_{j<m} g_j f_{m-j}.
// values must hold f_0..f_horizon with f_0 = 1.
Vec deconvolve(std::span<const double> f, int horizon);
ExtendedVec deconvolve_extended(std::span<const double> f, int horizon);

ModelSequences extract_coefficients(const StepDistribution& kernel, const FTable& table, int horizon);

}  // namespace lace
