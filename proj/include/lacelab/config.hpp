#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lacelab/model.hpp"
#include "lacelab/quadrature.hpp"
#include "lacelab/verify.hpp"

namespace lace {

enum class Analysis { check_d, run, critical, verify, norms, gaussian };

std::string to_string(Analysis a);
Analysis parse_analysis(const std::string& s);
// Fixed execution order.
const std::vector<Analysis>& analysis_order();

struct KernelConfig {
  // Either a "d:L[:include-origin]" spec or a path to a kernel JSON document.
  std::string spec = "1:5";
  std::string file;
};

struct ModelConfig {
  ModelKind kind = ModelKind::simple_random_walk;
  SyntheticSpec synthetic;
  double u = 0.0;
  int n_max = 0;  // 0: the budget's max horizon
};

// A z value given either as a number or as "z_c".
struct ZChoice {
  bool use_zc = false;
  double value = 1.0;
};

struct Budgets {
  int max_horizon = kDefaultHorizonCap;
  double max_enumeration_steps = kDefaultEnumerationBudget;
  std::uint64_t max_mc_samples = 10000000;
};

struct RunSection {
  ZChoice z;
  int horizon = 64;
  int k_count = 16;
  std::string k_file;
};

struct CriticalSection {
  int M = 4096;
  double tol = 1e-10;
  double alpha = 0.1;
};

struct VerifySection {
  ZChoice z{true, 1.0};
  int horizon = 256;
  int k_count = 16;
  Vec zs{0.95, 1.0};
  Vec eps_primes;  // default {0, eps}
  std::vector<int> region_js{16, 64};
};

struct NormsSection {
  ZChoice z{true, 1.0};
  std::vector<int> ms;
  Vec ps{1.0, 2.0};
  QuadratureSpec quad;
  bool fit = true;
};

struct GaussianSection {
  std::vector<int> ladder = {64, 128, 256, 512, 1024, 2048, 4096};
  Vec magnitudes{0.0, 0.5, 1.0, 2.0};
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  KernelConfig kernel;
  ModelConfig model;
  InductionParams params;
  // params.beta is derived from the kernel unless given explicitly.
  bool beta_given = false;
  std::vector<Analysis> analyses;
  Budgets budgets;
  RunSection run;
  CriticalSection critical;
  VerifySection verify;
  NormsSection norms;
  GaussianSection gaussian;

  bool wants(Analysis a) const;
};

// Parses and validates a config document. Schema errors name the JSON path
// ("/model/theta: expected a number"); parameter constraint failures carry
// the violated inequalities verbatim.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// Cross-field checks (also run by parse_config).
void validate(const RunConfig& config);

}  // namespace lace
