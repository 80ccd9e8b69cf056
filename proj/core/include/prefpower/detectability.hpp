#pragma once

#include <cstdint>
#include <vector>

#include "prefpower/judgments.hpp"

namespace prefpower {

struct CurveOptions {
  double alpha = 0.05;
  std::size_t trials = 2000;
  bool with_replacement = true;  // false: subsample without replacement
  bool normal_approx = false;    // z-test instead of the exact binomial test
};

struct DetectabilityCurve {
  PairKey pair;
  std::vector<std::int64_t> n_grid;
  std::vector<double> power;  // detection probability per grid point
  double alpha = 0.05;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

// Monte-Carlo detection probability per budget: at each n, resample n
// decisive judgments from the aggregate (drop policy) `trials` times and
// test against indifference at level alpha. RNG streams are derived per
// (pair, n, trial), so the curve is independent of evaluation order.
DetectabilityCurve detectability_curve(const PairAggregate& agg,
                                       std::vector<std::int64_t> n_grid,
                                       const CurveOptions& options, std::uint64_t seed);

struct SameBudgetSummary {
  std::int64_t subsample_n = 0;
  std::size_t pair_count = 0;
  std::size_t samples = 0;              // finite z values pooled
  std::size_t degenerate_excluded = 0;  // subsamples with p_hat in {0,1}
  double z_p10 = 0.0;
  double z_median = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

// Detectability z distribution at a fixed budget: for each pair with at
// least n decisive judgments, draw `trials` subsamples of exactly n without
// replacement and pool the z statistics.
SameBudgetSummary same_budget_z(const Dataset& ds, std::int64_t n, std::size_t trials,
                                std::uint64_t seed);

}  // namespace prefpower
