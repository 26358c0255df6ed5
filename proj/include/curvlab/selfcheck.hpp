// Reduced-resolution battery of the module invariants; the CLI `selfcheck`
// analysis serializes its result.
#pragma once

#include <string>
#include <vector>

#include "curvlab/report.hpp"

namespace curvlab {

struct SelfcheckItem {
  std::string name;
  bool pass = false;
  double value = 0;      // the measured metric
  double threshold = 0;  // the bound it was held to
};

struct SelfcheckResult {
  std::vector<SelfcheckItem> items;
  bool all_pass = true;
  jval to_json() const;
};

SelfcheckResult run_selfcheck(std::uint64_t seed = 0);

}  // namespace curvlab
