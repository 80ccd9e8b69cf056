#include "prefpower/dependence.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "prefpower/errors.hpp"

namespace prefpower {

namespace {

struct ClusterCounts {
  std::int64_t n = 0;     // decisive judgments in the cluster
  std::int64_t wins = 0;  // second-model wins
};

// Decisive counts per prompt, in canonical per_prompt order.
std::vector<ClusterCounts> decisive_clusters(const Dataset& ds, const PairKey& pair) {
  const auto agg = aggregate(ds, pair);
  std::vector<ClusterCounts> clusters;
  for (const auto& [prompt, pc] : agg.per_prompt) {
    const std::int64_t n = pc.wins_first + pc.wins_second;
    if (n > 0) clusters.push_back({n, pc.wins_second});
  }
  return clusters;
}

}  // namespace

InflationResult inflated_sample_size(std::int64_t n0, double rho) {
  if (n0 < 1) throw std::domain_error("inflated_sample_size: n0 must be >= 1");
  if (rho < 0.0 || rho >= 1.0)
    throw std::domain_error("inflated_sample_size: rho must be in [0,1)");

  InflationResult r;
  r.n0 = n0;
  r.rho = rho;
  if (static_cast<double>(n0) * rho >= 0.95) {
    r.feasible = false;
    return r;
  }
  r.inflation = (1.0 - rho) / (1.0 - static_cast<double>(n0) * rho);
  r.n_exact = static_cast<double>(n0) * r.inflation;
  r.n_inflated = static_cast<std::int64_t>(std::floor(r.n_exact));
  return r;
}

ClusterRobustResult cluster_robust_ratio(const Dataset& ds, const PairKey& pair) {
  const auto clusters = decisive_clusters(ds, pair);
  if (clusters.size() < 2)
    throw UsageError("cluster_robust_ratio: need judgments on at least 2 prompts");

  std::int64_t n = 0, wins = 0;
  for (const auto& c : clusters) {
    n += c.n;
    wins += c.wins;
  }
  const double p_hat = static_cast<double>(wins) / static_cast<double>(n);
  if (p_hat == 0.0 || p_hat == 1.0)
    throw std::domain_error("cluster_robust_ratio: degenerate outcomes (p_hat in {0,1})");

  // Classical: sum over individual deviations; cluster: sum over cluster
  // score deviations. Iterating judgments within the same cluster order
  // makes the two sums term-identical when every cluster has size one.
  double classical_sum = 0.0, cluster_sum = 0.0;
  for (const auto& c : clusters) {
    for (std::int64_t j = 0; j < c.n; ++j) {
      const double y = j < c.wins ? 1.0 : 0.0;
      classical_sum += (y - p_hat) * (y - p_hat);
    }
    const double score = static_cast<double>(c.wins) - static_cast<double>(c.n) * p_hat;
    cluster_sum += score * score;
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);

  ClusterRobustResult r;
  r.classical_variance = classical_sum / n2;
  r.cluster_variance = cluster_sum / n2;
  r.ratio = r.cluster_variance / r.classical_variance;
  r.clusters = clusters.size();
  r.n = n;
  return r;
}

VarianceDecomposition variance_decomposition(const Dataset& ds, const PairKey& pair) {
  const auto clusters = decisive_clusters(ds, pair);
  if (clusters.size() < 2)
    throw UsageError("variance_decomposition: need judgments on at least 2 prompts");

  VarianceDecomposition d;
  d.prompts = clusters.size();

  std::vector<double> rates;
  rates.reserve(clusters.size());
  for (const auto& c : clusters)
    rates.push_back(static_cast<double>(c.wins) / static_cast<double>(c.n));

  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  double ss = 0.0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  d.between_prompt = ss / static_cast<double>(rates.size() - 1);

  double within_sum = 0.0;
  for (const auto& c : clusters) {
    if (c.n < 2) continue;
    ++d.prompts_with_repeats;
    const double p = static_cast<double>(c.wins) / static_cast<double>(c.n);
    // Unbiased Bernoulli variance: n/(n-1) * p(1-p).
    within_sum += static_cast<double>(c.n) / static_cast<double>(c.n - 1) * p * (1.0 - p);
  }
  d.within_prompt =
      d.prompts_with_repeats == 0 ? 0.0 : within_sum / static_cast<double>(d.prompts_with_repeats);
  return d;
}

}  // namespace prefpower
