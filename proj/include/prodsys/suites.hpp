#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prodsys/linalg.hpp"

namespace prodsys {

inline constexpr const char* kVersion = "1.0.0";

struct SuiteConfig {
  std::string suite = "all";
  int k = 1;
  int level = 2;
  int coarse_level = 0;
  double tol_identity = kTolIdentity;
  double tol_spectral = kTolSpectral;
  std::string state = "tracial";  // tracial | diag
  std::uint64_t seed = 1;
  Eigen::Index slice_cap = 4096;

  void validate() const;  // BadInput on inconsistent settings
};

struct Check {
  std::string name;
  std::string ref;  // identity tag of what is being verified
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct Report {
  std::string suite;
  SuiteConfig config;
  std::vector<Check> checks;
  double wall_time_s = 0.0;

  bool passed() const;
};

// Known suite names, in canonical order.
const std::vector<std::string>& suite_names();

Report run_suite(const SuiteConfig& cfg);

nlohmann::json report_to_json(const Report& r);
nlohmann::json config_to_json(const SuiteConfig& cfg);
SuiteConfig config_from_json(const nlohmann::json& j);

// Object dumps for the CLI: spec = {"object": "...", ...params}. Objects:
// ccr-system, truncated-system, vacuum-family, vacuum-root-family,
// distribution, report.
nlohmann::json dump_object(const nlohmann::json& request);

}  // namespace prodsys
