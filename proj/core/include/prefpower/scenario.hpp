#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prefpower/allocation.hpp"

namespace prefpower {

// Simulation scenario: a prompt-type model plus the policies and budget
// grid to sweep. Parsed from a JSON key/value document with keys
// {m, weights, deltas, budgets, policy, b, q, alpha, trials, seed}.
struct ScenarioConfig {
  PromptTypeModel model;
  std::vector<std::int64_t> budgets;
  bool run_proportional = true;
  bool run_two_stage = true;
  std::int64_t screening_budget = 0;  // 0: default ceil(10 ln m)
  double retention = 0.2;
  double alpha = 0.05;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;

  AllocationPolicy two_stage_policy() const;
};

// Throws DataError listing every offending key when the document does not
// match the schema. "weights": "uniform" expands to 1/m per type; explicit
// weight vectors are normalized to the simplex.
ScenarioConfig load_scenario(std::istream& in);
ScenarioConfig load_scenario_file(const std::string& path);

}  // namespace prefpower
