#include "prefpower/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "prefpower/errors.hpp"
#include "prefpower/stats.hpp"

namespace prefpower {

namespace {

constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

// Largest-remainder split of `budget` over the `active` indices, each capped
// by caps[i]; shortfall from capped types is redistributed proportionally
// among the remaining active types. Strict mode refuses to redistribute.
std::vector<std::int64_t> allocate_with_caps(std::span<const double> weights,
                                             std::vector<std::size_t> active,
                                             std::span<const std::int64_t> caps,
                                             std::int64_t budget, bool strict) {
  std::vector<std::int64_t> counts(weights.size(), 0);
  std::int64_t remaining = budget;
  while (remaining > 0) {
    if (active.empty())
      throw InfeasibleError("allocation: retained types cannot absorb the budget");
    std::vector<double> w;
    w.reserve(active.size());
    for (std::size_t i : active) w.push_back(weights[i]);
    const auto share = proportional_allocate(w, remaining);

    std::vector<std::size_t> still_open;
    std::int64_t spilled = 0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const std::size_t i = active[j];
      const std::int64_t cap = caps.empty() ? kUnbounded : caps[i];
      const std::int64_t room = cap - counts[i];
      if (share[j] > room) {
        if (strict)
          throw InfeasibleError("allocation: type pool exhausted under strict mode");
        counts[i] += room;
        spilled += share[j] - room;
      } else {
        counts[i] += share[j];
        if (counts[i] < cap) still_open.push_back(i);
      }
    }
    remaining = spilled;
    active = std::move(still_open);
  }
  return counts;
}

// Outcome sources for the two-stage engine. Both report how many of the
// requested judgments favored the second model.
struct ModelDrawer {
  const PromptTypeModel& model;
  Rng& rng;

  std::int64_t capacity(std::size_t) const { return kUnbounded; }
  std::int64_t draw(std::size_t type, std::int64_t count) {
    return rng.binomial(count, 0.5 + model.deltas[type]);
  }
};

struct PoolDrawer {
  std::vector<std::int64_t> remaining;
  std::vector<std::int64_t> remaining_wins;
  Rng& rng;

  std::int64_t capacity(std::size_t type) const { return remaining[type]; }
  std::int64_t draw(std::size_t type, std::int64_t count) {
    const std::int64_t w = rng.hypergeometric(remaining[type], remaining_wins[type], count);
    remaining[type] -= count;
    remaining_wins[type] -= w;
    return w;
  }
};

template <typename Drawer>
TwoStageTrial run_two_stage(std::span<const double> weights, std::int64_t budget,
                            std::int64_t screening_budget, double retention, double alpha,
                            Drawer& drawer, bool strict) {
  const std::size_t m = weights.size();
  TwoStageTrial trial;
  trial.stage1_counts.resize(m, 0);
  trial.stage1_estimates.resize(m, 0.0);
  trial.stage2_counts.resize(m, 0);

  std::vector<std::int64_t> caps(m, kUnbounded);
  for (std::size_t i = 0; i < m; ++i) caps[i] = drawer.capacity(i);

  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t b_i = screening_budget;
    if (caps[i] < b_i) {
      if (strict) throw InfeasibleError("two-stage: type pool smaller than screening budget");
      b_i = caps[i];
    }
    trial.stage1_counts[i] = b_i;
    if (b_i > 0) {
      const std::int64_t wins = drawer.draw(i, b_i);
      trial.stage1_estimates[i] =
          static_cast<double>(wins) / static_cast<double>(b_i) - 0.5;
    }
  }

  trial.selected = top_q_by_squared(trial.stage1_estimates, retention);

  const std::int64_t spent =
      std::accumulate(trial.stage1_counts.begin(), trial.stage1_counts.end(), std::int64_t{0});
  const std::int64_t stage2_budget = budget - spent;
  if (stage2_budget > 0) {
    std::vector<std::int64_t> caps_now(m, kUnbounded);
    for (std::size_t i = 0; i < m; ++i) caps_now[i] = drawer.capacity(i);
    trial.stage2_counts =
        allocate_with_caps(weights, trial.selected, caps_now, stage2_budget, strict);
    for (std::size_t i = 0; i < m; ++i) {
      if (trial.stage2_counts[i] > 0) {
        trial.test_wins += drawer.draw(i, trial.stage2_counts[i]);
        trial.test_n += trial.stage2_counts[i];
      }
    }
  }

  // Decision uses stage-2 outcomes only. An empty stage 2 cannot reject.
  if (trial.test_n > 0) {
    trial.p_value = exact_binomial_test(trial.test_wins, trial.test_n);
    trial.reject = trial.p_value < alpha;
  }
  return trial;
}

double finite_mean(const std::vector<double>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

}  // namespace

void PromptTypeModel::validate() const {
  if (weights.empty()) throw UsageError("PromptTypeModel: need at least one type");
  if (weights.size() != deltas.size())
    throw UsageError("PromptTypeModel: weights and deltas must have equal length");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw UsageError("PromptTypeModel: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError("PromptTypeModel: weights must sum to 1");
  for (double d : deltas) {
    if (std::abs(d) > 0.25)
      throw std::domain_error("PromptTypeModel: |delta| must be <= 0.25");
  }
}

const char* policy_name(PolicyKind kind) {
  return kind == PolicyKind::kProportional ? "proportional" : "two_stage";
}

AllocationPolicy AllocationPolicy::two_stage(std::int64_t b, double q) {
  if (b < 1) throw UsageError("two_stage policy: screening budget must be >= 1");
  if (!(q > 0.0 && q <= 1.0)) throw UsageError("two_stage policy: retention must be in (0,1]");
  AllocationPolicy p;
  p.kind = PolicyKind::kTwoStage;
  p.screening_budget = b;
  p.retention = q;
  return p;
}

std::int64_t default_screening_budget(std::size_t m) {
  const double b = std::ceil(10.0 * std::log(static_cast<double>(m)));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(b));
}

std::vector<std::int64_t> proportional_allocate(std::span<const double> weights,
                                                std::int64_t budget) {
  if (weights.empty()) throw UsageError("proportional_allocate: no weights");
  if (budget < 0) throw UsageError("proportional_allocate: negative budget");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw UsageError("proportional_allocate: weights must be positive");
    total += w;
  }

  const std::size_t m = weights.size();
  std::vector<std::int64_t> counts(m);
  std::vector<std::pair<double, std::size_t>> remainders(m);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double exact = static_cast<double>(budget) * weights[i] / total;
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    remainders[i] = {exact - std::floor(exact), i};
    assigned += counts[i];
  }
  // Largest fraction first; ties to the lower index.
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::int64_t r = budget - assigned, j = 0; r > 0; --r, ++j)
    counts[remainders[static_cast<std::size_t>(j)].second]++;
  return counts;
}

double allocation_bottleneck(std::span<const std::int64_t> counts,
                             std::span<const double> weights) {
  if (counts.size() != weights.size())
    throw UsageError("allocation_bottleneck: length mismatch");
  if (counts.empty()) throw UsageError("allocation_bottleneck: empty input");
  double lambda = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!(weights[i] > 0.0)) throw UsageError("allocation_bottleneck: weights must be positive");
    lambda = std::min(lambda, static_cast<double>(counts[i]) / weights[i]);
  }
  return lambda;
}

std::vector<std::size_t> top_q_by_squared(std::span<const double> values, double q) {
  if (values.empty()) throw UsageError("top_q_by_squared: empty input");
  if (!(q > 0.0 && q <= 1.0)) throw UsageError("top_q_by_squared: q must be in (0,1]");
  const std::size_t m = values.size();
  // The 1e-9 slack absorbs upward rounding noise in q*m (e.g. 0.1 * 20).
  const auto k = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(m) - 1e-9));
  const std::size_t keep = std::clamp<std::size_t>(k, 1, m);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = values[a] * values[a], vb = values[b] * values[b];
    if (va != vb) return va > vb;
    return a < b;
  });
  std::vector<std::size_t> selected(order.begin(), order.begin() + keep);
  std::sort(selected.begin(), selected.end());
  return selected;
}

std::vector<std::size_t> oracle_top_q(const PromptTypeModel& model, double q) {
  std::vector<double> mass(model.size());
  for (std::size_t i = 0; i < model.size(); ++i)
    mass[i] = std::sqrt(model.weights[i]) * model.deltas[i];  // squares to w * d^2
  return top_q_by_squared(mass, q);
}

AllocationDiagnostics diagnostics(const PromptTypeModel& model, double q,
                                  std::span<const std::int64_t> realized_counts,
                                  std::span<const std::size_t> selected,
                                  std::span<const double> estimates) {
  model.validate();
  if (estimates.size() != model.size())
    throw UsageError("diagnostics: estimates length mismatch");

  AllocationDiagnostics d;
  d.lambda = allocation_bottleneck(realized_counts, model.weights);

  double total_mass = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i)
    total_mass += model.weights[i] * model.deltas[i] * model.deltas[i];
  d.mu2 = total_mass;

  const auto oracle = oracle_top_q(model, q);
  double oracle_w = 0.0, oracle_mass = 0.0;
  for (std::size_t i : oracle) {
    oracle_w += model.weights[i];
    oracle_mass += model.weights[i] * model.deltas[i] * model.deltas[i];
  }
  d.mu2_q = oracle_w > 0.0 ? oracle_mass / oracle_w : 0.0;

  double est_total = 0.0, est_top = 0.0;
  const auto est_top_set = top_q_by_squared(estimates, q);
  for (std::size_t i = 0; i < estimates.size(); ++i) est_total += estimates[i] * estimates[i];
  for (std::size_t i : est_top_set) est_top += estimates[i] * estimates[i];
  d.kappa = est_total > 0.0 ? est_top / (q * est_total)
                            : std::numeric_limits<double>::quiet_NaN();

  std::vector<std::size_t> inter, uni;
  std::set_intersection(selected.begin(), selected.end(), oracle.begin(), oracle.end(),
                        std::back_inserter(inter));
  std::set_union(selected.begin(), selected.end(), oracle.begin(), oracle.end(),
                 std::back_inserter(uni));
  d.jaccard = uni.empty() ? 1.0
                          : static_cast<double>(inter.size()) / static_cast<double>(uni.size());

  double captured = 0.0;
  for (std::size_t i : selected)
    captured += model.weights[i] * model.deltas[i] * model.deltas[i];
  d.signal_mass = total_mass > 0.0 ? captured / total_mass
                                   : std::numeric_limits<double>::quiet_NaN();

  d.error_floor = 0.5 * std::exp(-d.mu2 * d.lambda);
  return d;
}

TwoStageTrial two_stage_allocate(const PromptTypeModel& model, std::int64_t budget,
                                 std::int64_t screening_budget, double retention, double alpha,
                                 Rng& rng) {
  model.validate();
  const auto m = static_cast<std::int64_t>(model.size());
  if (screening_budget < 1) throw UsageError("two_stage_allocate: screening budget must be >= 1");
  if (!(retention > 0.0 && retention <= 1.0))
    throw UsageError("two_stage_allocate: retention must be in (0,1]");
  if (budget < m * screening_budget)
    throw InfeasibleError("two_stage_allocate: budget below m*b screening cost");
  ModelDrawer drawer{model, rng};
  return run_two_stage(model.weights, budget, screening_budget, retention, alpha, drawer,
                       /*strict=*/false);
}

TwoStageTrial two_stage_allocate(const ReplayPool& pool, std::int64_t budget,
                                 std::int64_t screening_budget, double retention, double alpha,
                                 Rng& rng, bool strict) {
  if (pool.labels.empty()) throw InfeasibleError("two_stage_allocate: empty pool");
  const auto m = static_cast<std::int64_t>(pool.labels.size());
  if (screening_budget < 1) throw UsageError("two_stage_allocate: screening budget must be >= 1");
  if (!(retention > 0.0 && retention <= 1.0))
    throw UsageError("two_stage_allocate: retention must be in (0,1]");
  if (budget < m * screening_budget)
    throw InfeasibleError("two_stage_allocate: budget below m*b screening cost");
  if (pool.total() < budget)
    throw InfeasibleError("two_stage_allocate: pool smaller than the budget");
  const auto weights = pool.weights();
  PoolDrawer drawer{pool.totals, pool.wins, rng};
  return run_two_stage(weights, budget, screening_budget, retention, alpha, drawer, strict);
}

SimulationSummary simulate_power(const PromptTypeModel& model, const AllocationPolicy& policy,
                                 std::int64_t budget, double alpha, std::size_t trials,
                                 std::uint64_t seed) {
  model.validate();
  if (trials < 1) throw UsageError("simulate_power: trials must be >= 1");
  if (budget < 1) throw UsageError("simulate_power: budget must be >= 1");

  SimulationSummary summary;
  summary.policy = policy.kind;
  summary.budget = budget;
  summary.trials = trials;
  summary.seed = seed;

  std::size_t rejections = 0;
  std::vector<double> lambdas, jaccards, masses, kappas;

  if (policy.kind == PolicyKind::kProportional) {
    const auto counts = proportional_allocate(model.weights, budget);
    const double lambda = allocation_bottleneck(counts, model.weights);
    BinomialTestPlan plan(budget, alpha);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, 0x70726F70ULL, trial));
      std::int64_t wins = 0;
      for (std::size_t i = 0; i < model.size(); ++i)
        wins += rng.binomial(counts[i], 0.5 + model.deltas[i]);
      if (plan.rejects(wins)) ++rejections;
    }
    lambdas.push_back(lambda);
  } else {
    const auto m = static_cast<std::int64_t>(model.size());
    if (budget < m * policy.screening_budget)
      throw InfeasibleError("simulate_power: budget below m*b screening cost");
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, 0x32737467ULL, trial));
      ModelDrawer drawer{model, rng};
      const auto t = run_two_stage(model.weights, budget, policy.screening_budget,
                                   policy.retention, alpha, drawer, /*strict=*/false);
      if (t.reject) ++rejections;

      std::vector<std::int64_t> total_counts(t.stage1_counts);
      for (std::size_t i = 0; i < total_counts.size(); ++i)
        total_counts[i] += t.stage2_counts[i];
      const auto diag = diagnostics(model, policy.retention, total_counts, t.selected,
                                    t.stage1_estimates);
      lambdas.push_back(diag.lambda);
      jaccards.push_back(diag.jaccard);
      masses.push_back(diag.signal_mass);
      kappas.push_back(diag.kappa);
    }
  }

  summary.power = static_cast<double>(rejections) / static_cast<double>(trials);
  summary.lambda_mean = finite_mean(lambdas);
  if (!jaccards.empty()) summary.jaccard_mean = finite_mean(jaccards);
  if (!masses.empty()) summary.signal_mass_mean = finite_mean(masses);
  if (!kappas.empty()) summary.kappa_mean = finite_mean(kappas);
  return summary;
}

std::int64_t ReplayPool::total() const {
  return std::accumulate(totals.begin(), totals.end(), std::int64_t{0});
}

std::vector<double> ReplayPool::weights() const {
  const double t = static_cast<double>(total());
  std::vector<double> w(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i) w[i] = static_cast<double>(totals[i]) / t;
  return w;
}

ReplayPool build_replay_pool(const Dataset& ds, const PairKey& pair) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> by_type;  // total, wins
  for (const auto& r : ds.records) {
    const bool forward = r.model_a == pair.first && r.model_b == pair.second;
    const bool reversed = r.model_a == pair.second && r.model_b == pair.first;
    if (!forward && !reversed) continue;
    if (r.outcome == Outcome::kTie || r.outcome == Outcome::kBothBad) continue;
    const bool second_won = forward ? r.outcome == Outcome::kBWins : r.outcome == Outcome::kAWins;
    auto& slot = by_type[r.prompt_type];
    slot.first++;
    if (second_won) slot.second++;
  }
  ReplayPool pool;
  for (const auto& [label, counts] : by_type) {
    pool.labels.push_back(label);
    pool.totals.push_back(counts.first);
    pool.wins.push_back(counts.second);
  }
  return pool;
}

SimulationSummary offline_replay(const ReplayPool& pool, const AllocationPolicy& policy,
                                 std::int64_t budget, const ReplayOptions& options) {
  if (pool.labels.empty()) throw InfeasibleError("offline_replay: empty pool");
  if (budget < 1) throw UsageError("offline_replay: budget must be >= 1");
  if (options.trials < 1) throw UsageError("offline_replay: trials must be >= 1");
  if (pool.total() < budget)
    throw InfeasibleError("offline_replay: pool holds " + std::to_string(pool.total()) +
                          " decisive judgments, budget needs " + std::to_string(budget));

  const auto weights = pool.weights();
  const auto m = static_cast<std::int64_t>(pool.labels.size());

  SimulationSummary summary;
  summary.policy = policy.kind;
  summary.budget = budget;
  summary.trials = options.trials;
  summary.seed = options.seed;

  std::size_t rejections = 0;
  std::vector<double> lambdas, kappas;

  if (policy.kind == PolicyKind::kTwoStage && budget < m * policy.screening_budget)
    throw InfeasibleError("offline_replay: budget below m*b screening cost");

  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    Rng rng(derive_seed(options.seed, 0x72706C79ULL, trial));
    PoolDrawer drawer{pool.totals, pool.wins, rng};
    if (policy.kind == PolicyKind::kProportional) {
      std::vector<std::size_t> all(pool.labels.size());
      std::iota(all.begin(), all.end(), 0);
      const auto counts =
          allocate_with_caps(weights, all, pool.totals, budget, options.strict_pool);
      std::int64_t wins = 0;
      for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) wins += drawer.draw(i, counts[i]);
      const double p = exact_binomial_test(wins, budget);
      if (p < options.alpha) ++rejections;
      lambdas.push_back(allocation_bottleneck(counts, weights));
    } else {
      const auto t = run_two_stage(weights, budget, policy.screening_budget, policy.retention,
                                   options.alpha, drawer, options.strict_pool);
      if (t.reject) ++rejections;
      std::vector<std::int64_t> total_counts(t.stage1_counts);
      for (std::size_t i = 0; i < total_counts.size(); ++i)
        total_counts[i] += t.stage2_counts[i];
      lambdas.push_back(allocation_bottleneck(total_counts, weights));
      double est_total = 0.0, est_top = 0.0;
      const auto est_top_set = top_q_by_squared(t.stage1_estimates, policy.retention);
      for (double e : t.stage1_estimates) est_total += e * e;
      for (std::size_t i : est_top_set)
        est_top += t.stage1_estimates[i] * t.stage1_estimates[i];
      if (est_total > 0.0) kappas.push_back(est_top / (policy.retention * est_total));
    }
  }

  summary.power = static_cast<double>(rejections) / static_cast<double>(options.trials);
  summary.lambda_mean = finite_mean(lambdas);
  if (!kappas.empty()) summary.kappa_mean = finite_mean(kappas);
  return summary;
}

}  // namespace prefpower
