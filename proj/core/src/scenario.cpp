#include "prefpower/scenario.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include <json.hpp>

#include "prefpower/errors.hpp"

namespace prefpower {

AllocationPolicy ScenarioConfig::two_stage_policy() const {
  const std::int64_t b =
      screening_budget > 0 ? screening_budget : default_screening_budget(model.size());
  return AllocationPolicy::two_stage(b, retention);
}

ScenarioConfig load_scenario(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw DataError("scenario: not a JSON object");

  static const std::set<std::string> known = {"m",      "weights", "deltas", "budgets", "policy",
                                              "b",      "q",       "alpha",  "trials",  "seed"};
  std::vector<std::string> problems;
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) problems.push_back("unknown key '" + key + "'");
  }

  ScenarioConfig cfg;

  std::size_t m = 0;
  if (!j.contains("m") || !j["m"].is_number_unsigned() || j["m"].get<std::int64_t>() < 1)
    problems.push_back("'m' must be a positive integer");
  else
    m = j["m"].get<std::size_t>();

  if (!j.contains("deltas") || !j["deltas"].is_array())
    problems.push_back("'deltas' must be an array of margins");
  else {
    for (const auto& d : j["deltas"]) {
      if (!d.is_number()) {
        problems.push_back("'deltas' entries must be numbers");
        break;
      }
      cfg.model.deltas.push_back(d.get<double>());
    }
    if (m > 0 && cfg.model.deltas.size() != m)
      problems.push_back("'deltas' length must equal m");
  }

  if (!j.contains("weights"))
    problems.push_back("'weights' is required ('uniform' or an array)");
  else if (j["weights"].is_string() && j["weights"].get<std::string>() == "uniform") {
    if (m > 0)
      cfg.model.weights.assign(m, 1.0 / static_cast<double>(m));
  } else if (j["weights"].is_array()) {
    double sum = 0.0;
    for (const auto& w : j["weights"]) {
      if (!w.is_number() || w.get<double>() <= 0.0) {
        problems.push_back("'weights' entries must be positive numbers");
        break;
      }
      cfg.model.weights.push_back(w.get<double>());
      sum += w.get<double>();
    }
    if (m > 0 && cfg.model.weights.size() != m)
      problems.push_back("'weights' length must equal m");
    else if (sum > 0.0)
      for (double& w : cfg.model.weights) w /= sum;
  } else {
    problems.push_back("'weights' must be 'uniform' or an array");
  }

  if (!j.contains("budgets") || !j["budgets"].is_array() || j["budgets"].empty())
    problems.push_back("'budgets' must be a nonempty array of integers");
  else {
    for (const auto& b : j["budgets"]) {
      if (!b.is_number_integer() || b.get<std::int64_t>() < 1) {
        problems.push_back("'budgets' entries must be positive integers");
        break;
      }
      cfg.budgets.push_back(b.get<std::int64_t>());
    }
  }

  if (j.contains("policy")) {
    const std::string p = j["policy"].is_string() ? j["policy"].get<std::string>() : "";
    if (p == "proportional") {
      cfg.run_two_stage = false;
    } else if (p == "two_stage") {
      cfg.run_proportional = false;
    } else if (p != "both") {
      problems.push_back("'policy' must be one of proportional|two_stage|both");
    }
  }

  if (j.contains("b")) {
    if (!j["b"].is_number_integer() || j["b"].get<std::int64_t>() < 1)
      problems.push_back("'b' must be a positive integer");
    else
      cfg.screening_budget = j["b"].get<std::int64_t>();
  }
  if (j.contains("q")) {
    if (!j["q"].is_number() || !(j["q"].get<double>() > 0.0 && j["q"].get<double>() <= 1.0))
      problems.push_back("'q' must be in (0,1]");
    else
      cfg.retention = j["q"].get<double>();
  }
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number() ||
        !(j["alpha"].get<double>() > 0.0 && j["alpha"].get<double>() < 1.0))
      problems.push_back("'alpha' must be in (0,1)");
    else
      cfg.alpha = j["alpha"].get<double>();
  }
  if (j.contains("trials")) {
    if (!j["trials"].is_number_unsigned() || j["trials"].get<std::int64_t>() < 1)
      problems.push_back("'trials' must be a positive integer");
    else
      cfg.trials = j["trials"].get<std::size_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      problems.push_back("'seed' must be a nonnegative integer");
    else
      cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (!problems.empty()) {
    std::string msg = "scenario schema errors:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw DataError(msg);
  }

  cfg.model.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("scenario: cannot open '" + path + "'");
  return load_scenario(in);
}

}  // namespace prefpower
