#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prefpower/allocation.hpp"
#include "prefpower/judgments.hpp"
#include "prefpower/stats.hpp"

namespace prefpower {

enum class Verdict { kFeasible, kUnderpowered, kSwitchProtocol };

const char* verdict_name(Verdict v);

struct FeasibilityReport {
  double p_hat = 0.5;
  double delta_hat = 0.0;
  std::int64_t pilot_decisive = 0;
  std::int64_t available_budget = 0;
  // Absent when the pilot margin is exactly zero (no finite budget works).
  std::optional<std::int64_t> required_n;
  Verdict verdict = Verdict::kUnderpowered;
  std::string narrative;
  std::vector<std::string> warnings;
};

// Pilot-based feasibility verdict: margin under the drop policy, required
// budget from the closed form, FEASIBLE iff it fits the available budget.
// When it does not fit, SWITCH_PROTOCOL flags pilots in the low-signal
// regime (|delta| <= low_signal_threshold); otherwise UNDERPOWERED, always
// carrying the required budget so a non-detection reads as a budget
// limitation rather than evidence of equivalence.
FeasibilityReport pilot_assess(const PairAggregate& pilot, const TestConfig& cfg,
                               std::int64_t available_budget,
                               double low_signal_threshold = 0.05);

struct AllocationAdvice {
  PolicyKind choice = PolicyKind::kProportional;
  std::string reason;
};

// Two-stage screening is advised only with budget headroom (B >= m*b) and a
// concentrated squared-signal statistic (kappa above the threshold);
// proportional allocation otherwise.
AllocationAdvice allocation_advice(double kappa, std::int64_t budget, std::int64_t m,
                                   std::int64_t b, double kappa_threshold = 1.5);

}  // namespace prefpower
