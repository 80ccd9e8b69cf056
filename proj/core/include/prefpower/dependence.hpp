#pragma once

#include <cstdint>

#include "prefpower/judgments.hpp"

namespace prefpower {

struct InflationResult {
  std::int64_t n0 = 0;
  double rho = 0.0;
  bool feasible = true;
  double inflation = 1.0;       // (1-rho) / (1-n0*rho); meaningful when feasible
  double n_exact = 0.0;         // n0 * inflation
  std::int64_t n_inflated = 0;  // floor(n_exact) for display
};

// Nominal sample size required for an effective size of n0 under
// intra-cluster correlation rho. Infeasible (reported as "---" / ">10000")
// when n0*rho >= 0.95. Requires n0 >= 1 and 0 <= rho < 1.
InflationResult inflated_sample_size(std::int64_t n0, double rho);

struct ClusterRobustResult {
  double ratio = 1.0;  // cluster-robust over classical variance
  double classical_variance = 0.0;
  double cluster_variance = 0.0;
  std::size_t clusters = 0;
  std::int64_t n = 0;  // decisive judgments
};

// Sandwich-style variance with prompts as clusters, over the pair's
// decisive outcomes, against the classical binomial variance. Both sums run
// over the same terms in the same order, so singleton clusters give a ratio
// of exactly 1. Throws when fewer than 2 prompt clusters exist or the
// outcomes are degenerate (all one-sided).
ClusterRobustResult cluster_robust_ratio(const Dataset& ds, const PairKey& pair);

struct VarianceDecomposition {
  double between_prompt = 0.0;  // variance of per-prompt win rates
  double within_prompt = 0.0;   // mean unbiased within-prompt variance
  std::size_t prompts = 0;
  std::size_t prompts_with_repeats = 0;
};

// Between/within split of the pair's decisive outcomes grouped by prompt.
// Prompts judged once contribute nothing to the within term.
VarianceDecomposition variance_decomposition(const Dataset& ds, const PairKey& pair);

}  // namespace prefpower
