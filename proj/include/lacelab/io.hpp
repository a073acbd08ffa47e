#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lacelab/critical.hpp"
#include "lacelab/gaussian.hpp"
#include "lacelab/kernel.hpp"
#include "lacelab/quadrature.hpp"
#include "lacelab/recursion.hpp"
#include "lacelab/verify.hpp"

namespace lace {

using json = nlohmann::ordered_json;

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

// Kernel as {"d", "L", "support": [{"x": [...], "mass": "num/den"}, ...]}.
json kernel_to_json(const StepDistribution& dist);
StepDistribution kernel_from_json(const json& j);

json to_json(const AssumptionDReport& r);
json to_json(const CriticalConstants& c);
json to_json(const BoundReport& r);
json to_json(const std::vector<BoundReport>& rs);
json to_json(const NormEstimate& n);
json to_json(const RegionReport& r);

// CSV writers. Each file starts with a "# seed=<seed>" line.
std::string f_table_csv(const RecursionState& st, std::uint64_t seed);
json f_table_json(const RecursionState& st, std::uint64_t seed);
std::string coefficients_csv(const ModelSequences& model, const std::vector<Vec>& k_set, double z, int horizon,
                             std::uint64_t seed);
std::string norms_csv(const std::vector<NormEstimate>& norms, std::uint64_t seed);
std::string gaussian_csv(const ScalingProbe& probe, std::uint64_t seed);

// Human-readable fixed-width table of bound reports.
std::string bound_table(const std::vector<BoundReport>& rs);

// One frequency vector per non-empty line (whitespace or comma separated),
// '#' comments allowed; or a JSON array of arrays.
std::vector<Vec> read_k_file(const std::string& path, int d);

std::string sha256_hex(const std::string& bytes);

}  // namespace lace
