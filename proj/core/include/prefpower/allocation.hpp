#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefpower/judgments.hpp"
#include "prefpower/rng.hpp"

namespace prefpower {

// Prompt-type mixture: incidence weights on the simplex and a per-type
// preference margin, |delta_i| <= 1/4.
struct PromptTypeModel {
  std::vector<double> weights;
  std::vector<double> deltas;

  std::size_t size() const { return weights.size(); }
  void validate() const;
};

enum class PolicyKind { kProportional, kTwoStage };

const char* policy_name(PolicyKind kind);

struct AllocationPolicy {
  PolicyKind kind = PolicyKind::kProportional;
  std::int64_t screening_budget = 0;  // b, per type (two-stage only)
  double retention = 0.2;             // q in (0,1] (two-stage only)

  static AllocationPolicy proportional() { return {}; }
  static AllocationPolicy two_stage(std::int64_t b, double q);
};

// ceil(10 ln m), clamped to at least 1.
std::int64_t default_screening_budget(std::size_t m);

// Largest-remainder split of `budget` proportional to `weights` (need not be
// normalized). Remainders broken by larger fraction, then lower index.
std::vector<std::int64_t> proportional_allocate(std::span<const double> weights,
                                                std::int64_t budget);

// min_i counts[i] / weights[i]; the cheapest direction for an adversary to
// hide signal in. Zero when any positive-weight type is starved.
double allocation_bottleneck(std::span<const std::int64_t> counts,
                             std::span<const double> weights);

// Indices of the ceil(q*m) largest values[i]^2, ties to the lower index;
// returned sorted ascending.
std::vector<std::size_t> top_q_by_squared(std::span<const double> values, double q);

// Top-q set ranked by w_i * delta_i^2 (the signal-mass oracle).
std::vector<std::size_t> oracle_top_q(const PromptTypeModel& model, double q);

struct AllocationDiagnostics {
  double lambda = 0.0;       // allocation bottleneck of the realized counts
  double mu2 = 0.0;          // sum_i w_i delta_i^2
  double mu2_q = 0.0;        // weighted mean delta^2 over the oracle top-q
  double kappa = 0.0;        // top-q squared-signal concentration (NaN if no signal)
  double jaccard = 0.0;      // selected vs oracle top-q overlap
  double signal_mass = 0.0;  // share of sum w_i delta_i^2 captured by selected
  double error_floor = 0.0;  // 0.5 exp(-mu2 * lambda), C = 1 reference curve
};

// All diagnostic fields for one realized allocation. `estimates` are the
// per-type margin estimates used by the kappa statistic (pass the true
// deltas when no screening estimates exist).
AllocationDiagnostics diagnostics(const PromptTypeModel& model, double q,
                                  std::span<const std::int64_t> realized_counts,
                                  std::span<const std::size_t> selected,
                                  std::span<const double> estimates);

struct TwoStageTrial {
  std::vector<std::size_t> selected;        // retained types, ascending
  std::vector<double> stage1_estimates;     // delta_hat per type
  std::vector<std::int64_t> stage1_counts;  // screening draws per type
  std::vector<std::int64_t> stage2_counts;  // focusing draws per type
  std::int64_t test_n = 0;                  // stage-2 outcomes only
  std::int64_t test_wins = 0;
  double p_value = 1.0;
  bool reject = false;
};

// One two-stage screening trial against the synthetic model: b Bernoulli
// draws per type, retain the top ceil(q*m) by squared estimate, spend the
// rest proportionally on the retained types, test stage-2 outcomes.
// Requires budget >= m*b (InfeasibleError otherwise).
TwoStageTrial two_stage_allocate(const PromptTypeModel& model, std::int64_t budget,
                                 std::int64_t screening_budget, double retention, double alpha,
                                 Rng& rng);

struct ReplayPool;

// Same trial drawn without replacement from a fixed pool (empirical type
// weights). Strict mode refuses exhausted types instead of redistributing.
TwoStageTrial two_stage_allocate(const ReplayPool& pool, std::int64_t budget,
                                 std::int64_t screening_budget, double retention, double alpha,
                                 Rng& rng, bool strict = false);

struct SimulationSummary {
  PolicyKind policy = PolicyKind::kProportional;
  std::int64_t budget = 0;
  double power = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double lambda_mean = 0.0;
  // Screening diagnostics; meaningful for two-stage runs only.
  std::optional<double> jaccard_mean;
  std::optional<double> signal_mass_mean;
  std::optional<double> kappa_mean;
};

// Empirical rejection rate of the policy over `trials` independent streams
// from the model, with per-trial derived RNG streams.
SimulationSummary simulate_power(const PromptTypeModel& model, const AllocationPolicy& policy,
                                 std::int64_t budget, double alpha, std::size_t trials,
                                 std::uint64_t seed);

// Fixed pool of decisive judgments for one pair, grouped by prompt type.
struct ReplayPool {
  std::vector<std::string> labels;
  std::vector<std::int64_t> totals;  // decisive judgments per type
  std::vector<std::int64_t> wins;    // second-model wins per type

  std::int64_t total() const;
  std::vector<double> weights() const;  // empirical incidence
};

ReplayPool build_replay_pool(const Dataset& ds, const PairKey& pair);

struct ReplayOptions {
  double alpha = 0.05;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  // Strict mode fails a run whose per-type assignment exceeds the pool;
  // otherwise the shortfall is redistributed proportionally among the
  // remaining types with capacity.
  bool strict_pool = false;
};

// Counterfactual policy power against the fixed pool: per trial, judgments
// are drawn without replacement (counts via sequential hypergeometric draws)
// and the same two-sided test is applied. Pool must hold at least `budget`
// judgments.
SimulationSummary offline_replay(const ReplayPool& pool, const AllocationPolicy& policy,
                                 std::int64_t budget, const ReplayOptions& options);

}  // namespace prefpower
