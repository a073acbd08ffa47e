#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lacelab/config.hpp"
#include "lacelab/kernel.hpp"
#include "lacelab/model.hpp"

namespace lace {

struct ArtifactEntry {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunOutcome {
  // 0: every analysis ran and every supplied constant held;
  // 1: verify found a bound exceeding its supplied constant;
  // 2: an analysis failed (outputs so far are kept, manifest is incomplete).
  int exit_status = 0;
  bool complete = true;
  std::vector<ArtifactEntry> files;
  std::optional<Analysis> failed_analysis;
  std::string error;
};

StepDistribution build_kernel(const RunConfig& config);
ModelSequences build_model(const RunConfig& config, const StepDistribution& kernel);

// Runs the requested analyses in the fixed order and writes their artifacts
// plus manifest.json into config.output_dir. Never throws for analysis
// failures; those are reported through the outcome and the manifest.
RunOutcome run_all(const RunConfig& config);

}  // namespace lace
