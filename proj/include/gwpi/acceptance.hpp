#pragma once

// The acceptance suite: twelve convergence and consistency checks run on a
// constant-family spec (by default nu = 0.5, c = 0.5, delta = 0.75,
// lambda = 0.5). Each check reports pass/fail with the numbers behind it.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwpi/sv_models.hpp"

namespace gwpi {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  ModelSpec spec = ModelSpec::default_spec();
  std::size_t workers = 1;
  std::uint64_t seed = 20240601;
  std::size_t reps = 1'000'000;
  /// Criterion ids to run; empty runs all twelve.
  std::vector<int> only;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// "[PASS] 7  title (1.23 s): detail"
std::string format_result(const CriterionResult& result);
nlohmann::json to_json(const std::vector<CriterionResult>& results);

}  // namespace gwpi
