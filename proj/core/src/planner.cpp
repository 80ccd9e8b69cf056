#include "prefpower/planner.hpp"

#include <cmath>
#include <sstream>

#include "prefpower/errors.hpp"

namespace prefpower {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kFeasible: return "FEASIBLE";
    case Verdict::kUnderpowered: return "UNDERPOWERED";
    case Verdict::kSwitchProtocol: return "SWITCH_PROTOCOL";
  }
  return "?";
}

FeasibilityReport pilot_assess(const PairAggregate& pilot, const TestConfig& cfg,
                               std::int64_t available_budget, double low_signal_threshold) {
  cfg.validate();
  if (pilot.decisive() < 1)
    throw InfeasibleError("pilot_assess: pilot has no decisive judgments");
  if (available_budget < 0) throw UsageError("pilot_assess: negative budget");

  const auto margin = estimate_margin(pilot, TiePolicy::kDrop);

  FeasibilityReport report;
  report.p_hat = margin.p_hat;
  report.delta_hat = margin.delta_hat;
  report.pilot_decisive = margin.n_decisive;
  report.available_budget = available_budget;

  if (report.pilot_decisive < 30 || report.pilot_decisive > 100)
    report.warnings.push_back("pilot has " + std::to_string(report.pilot_decisive) +
                              " decisive judgments; 30-100 is the recommended range");

  const double abs_delta = std::abs(report.delta_hat);
  if (abs_delta > 0.0) report.required_n = required_sample_size(report.delta_hat, cfg);

  const bool low_signal = abs_delta <= low_signal_threshold;
  const bool fits = report.required_n.has_value() && *report.required_n <= available_budget;

  std::ostringstream narrative;
  if (fits) {
    report.verdict = Verdict::kFeasible;
    narrative << "margin " << report.delta_hat << " needs " << *report.required_n
              << " decisive judgments; budget " << available_budget << " suffices";
  } else if (low_signal) {
    // Low signal dominates: even when also underpowered, the useful advice
    // is a higher-signal protocol, not merely more budget.
    report.verdict = Verdict::kSwitchProtocol;
    narrative << "pilot margin " << report.delta_hat << " is in the low-signal regime (|d| <= "
              << low_signal_threshold << "); detection needs ";
    if (report.required_n)
      narrative << *report.required_n << " judgments";
    else
      narrative << "an unbounded budget";
    narrative << " -- consider a protocol that amplifies margins";
  } else {
    report.verdict = Verdict::kUnderpowered;
    narrative << "margin " << report.delta_hat << " needs " << *report.required_n
              << " decisive judgments but only " << available_budget
              << " are available; treat non-detection as a budget limitation";
  }
  report.narrative = narrative.str();
  return report;
}

AllocationAdvice allocation_advice(double kappa, std::int64_t budget, std::int64_t m,
                                   std::int64_t b, double kappa_threshold) {
  if (m < 1) throw UsageError("allocation_advice: m must be >= 1");
  if (b < 1) throw UsageError("allocation_advice: b must be >= 1");

  AllocationAdvice advice;
  if (budget < m * b) {
    advice.choice = PolicyKind::kProportional;
    advice.reason = "small budget: B < m*b leaves no room for screening";
  } else if (std::isfinite(kappa) && kappa > kappa_threshold) {
    advice.choice = PolicyKind::kTwoStage;
    advice.reason = "concentrated signal: kappa > " + std::to_string(kappa_threshold) +
                    " and screening fits the budget";
  } else {
    advice.choice = PolicyKind::kProportional;
    advice.reason = "diffuse signal: top-q types carry no outsized share, so "
                    "proportional allocation is the right default";
  }
  return advice;
}

}  // namespace prefpower
