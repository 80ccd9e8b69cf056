#include "prefpower/detectability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prefpower/errors.hpp"
#include "prefpower/rng.hpp"
#include "prefpower/stats.hpp"

namespace prefpower {

namespace {

std::uint64_t pair_stream(const PairKey& pair) {
  return fnv1a64(pair.first + '\x1f' + pair.second);
}

}  // namespace

DetectabilityCurve detectability_curve(const PairAggregate& agg,
                                       std::vector<std::int64_t> n_grid,
                                       const CurveOptions& options, std::uint64_t seed) {
  const std::int64_t pool_n = agg.decisive();
  const std::int64_t pool_wins = agg.wins_second;
  if (pool_n < 1) throw InfeasibleError("detectability_curve: no decisive judgments");
  if (n_grid.empty()) throw UsageError("detectability_curve: empty budget grid");
  if (options.trials < 1) throw UsageError("detectability_curve: trials must be >= 1");
  for (std::int64_t n : n_grid) {
    if (n < 1) throw std::domain_error("detectability_curve: budgets must be >= 1");
    if (!options.with_replacement && n > pool_n)
      throw InfeasibleError("detectability_curve: budget exceeds pool without replacement");
  }

  const double p_pool = static_cast<double>(pool_wins) / static_cast<double>(pool_n);
  const std::uint64_t stream = pair_stream(agg.pair);
  const double z_crit = normal_quantile(1.0 - options.alpha / 2.0);

  DetectabilityCurve curve;
  curve.pair = agg.pair;
  curve.alpha = options.alpha;
  curve.trials = options.trials;
  curve.seed = seed;
  curve.n_grid = std::move(n_grid);
  curve.power.reserve(curve.n_grid.size());

  for (std::int64_t n : curve.n_grid) {
    // Exact-test rejection thresholds computed once per grid point.
    BinomialTestPlan plan(n, options.alpha);
    std::size_t rejections = 0;
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
      Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(n), trial));
      const std::int64_t wins = options.with_replacement
                                    ? rng.binomial(n, p_pool)
                                    : rng.hypergeometric(pool_n, pool_wins, n);
      bool reject;
      if (options.normal_approx) {
        const double p_hat = static_cast<double>(wins) / static_cast<double>(n);
        reject = (p_hat == 0.0 || p_hat == 1.0) ? true : detectability_z(p_hat, n) > z_crit;
      } else {
        reject = plan.rejects(wins);
      }
      if (reject) ++rejections;
    }
    curve.power.push_back(static_cast<double>(rejections) / static_cast<double>(options.trials));
  }
  return curve;
}

SameBudgetSummary same_budget_z(const Dataset& ds, std::int64_t n, std::size_t trials,
                                std::uint64_t seed) {
  if (n < 1) throw std::domain_error("same_budget_z: n must be >= 1");
  if (trials < 1) throw UsageError("same_budget_z: trials must be >= 1");

  SameBudgetSummary summary;
  summary.subsample_n = n;
  summary.trials = trials;
  summary.seed = seed;

  std::vector<double> z_values;
  for (const auto& pair : list_pairs(ds)) {
    const auto agg = aggregate(ds, pair);
    if (agg.decisive() < n) continue;
    ++summary.pair_count;
    const std::uint64_t stream = pair_stream(pair);
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(n), trial));
      const std::int64_t wins = rng.hypergeometric(agg.decisive(), agg.wins_second, n);
      const double p_hat = static_cast<double>(wins) / static_cast<double>(n);
      if (p_hat == 0.0 || p_hat == 1.0) {
        ++summary.degenerate_excluded;
        continue;
      }
      z_values.push_back(detectability_z(p_hat, n));
    }
  }
  if (z_values.empty())
    throw UsageError("same_budget_z: no qualifying pair has " + std::to_string(n) +
                     " decisive judgments");

  std::sort(z_values.begin(), z_values.end());
  summary.samples = z_values.size();
  auto quantile = [&](double q) {
    const double h = static_cast<double>(z_values.size() - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= z_values.size()) return z_values.back();
    return z_values[lo] + (h - static_cast<double>(lo)) * (z_values[lo + 1] - z_values[lo]);
  };
  summary.z_p10 = quantile(0.10);
  summary.z_median = quantile(0.50);
  return summary;
}

}  // namespace prefpower
