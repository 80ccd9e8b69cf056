#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "prefpower/judgments.hpp"
#include "prefpower/stats.hpp"

namespace prefpower {

struct QuantileRow {
  double level = 0.0;
  double abs_margin = 0.0;
  std::int64_t n_alpha05 = 0;  // implied budget at alpha = 0.05
  std::int64_t n_alpha01 = 0;  // implied budget at alpha = 0.01
};

struct QuantileReport {
  std::vector<QuantileRow> rows;
  std::size_t pair_count = 0;
  double power = 0.90;
};

struct NearTieReport {
  double tau = 0.10;
  std::size_t count = 0;
  std::size_t analyzed = 0;
  double proportion = 0.0;
  std::optional<double> median_abs_margin;   // empty subset -> nullopt
  std::optional<std::int64_t> implied_n_alpha05;
};

struct BootstrapCi {
  double level = 0.95;  // confidence level
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

struct TieRateRow {
  PairKey pair;
  double tie_rate = 0.0;    // t / (w1 + w2 + t)
  double abs_margin = 0.0;  // |delta| under the drop policy
};

struct TieRateStats {
  std::vector<TieRateRow> rows;
  std::optional<double> correlation;  // Pearson; nullopt when degenerate
};

struct StabilityRow {
  PairKey pair;
  double early_delta = 0.0;  // margin over the first k decisive judgments
  double late_delta = 0.0;   // margin over the last k decisive judgments
};

struct StabilityReport {
  std::int64_t window = 50;
  std::vector<StabilityRow> rows;
  std::vector<PairKey> skipped;           // pairs with fewer than 2k decisive
  std::optional<double> spearman;         // rank correlation early vs late
  std::optional<double> sign_test_p;      // two-sided sign test on |late|-|early|
};

// Empirical quantile with linear interpolation between order statistics
// (the numpy/R type-7 convention): h = (n-1)q. values need not be sorted.
double quantile_linear(std::vector<double> values, double q);

// Empirical |delta| quantiles with the implied budgets at alpha in
// {0.05, 0.01} and cfg.power.
QuantileReport tail_quantiles(std::span<const MarginEstimate> margins,
                              std::span<const double> levels, const TestConfig& cfg = {});

// Subset with |delta| <= tau (inclusive), its share of analyzed pairs, the
// median within the subset and that median's implied budget.
NearTieReport near_tie_filter(std::span<const MarginEstimate> margins, double tau,
                              const TestConfig& cfg = {});

// Percentile CI of the level-q |delta| quantile under resampling of pairs
// with replacement. Deterministic for a fixed seed.
BootstrapCi bootstrap_quantile_ci(std::span<const MarginEstimate> margins, double level_q,
                                  std::size_t replicates = 10000, double ci = 0.95,
                                  std::uint64_t seed = 0);

// Per-pair tie rates and their Pearson correlation with the drop-policy
// |delta|, over pairs with at least min_decisive decisive judgments.
TieRateStats tie_rate_stats(const Dataset& ds, std::int64_t min_decisive = 1);

// Margins from the first and last `window` decisive judgments of each
// qualifying pair, with the Spearman correlation across pairs.
StabilityReport early_late_stability(const Dataset& ds, std::int64_t window = 50);

// Spearman rank correlation with average ranks for ties. Throws
// std::domain_error when either vector is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// Pearson correlation. Throws std::domain_error when either vector is
// constant.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace prefpower
