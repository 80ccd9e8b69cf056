#include "prefpower/margin_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prefpower/errors.hpp"
#include "prefpower/rng.hpp"

namespace prefpower {

namespace {

std::vector<double> abs_margins(std::span<const MarginEstimate> margins) {
  std::vector<double> out;
  out.reserve(margins.size());
  for (const auto& m : margins) out.push_back(std::abs(m.delta_hat));
  return out;
}

// Budget implied by a margin estimate; quantiles can sit at exactly 0.
std::optional<std::int64_t> implied_budget(double abs_delta, const TestConfig& cfg) {
  if (abs_delta == 0.0 || abs_delta >= 0.5) return std::nullopt;
  return required_sample_size(abs_delta, cfg);
}

std::vector<double> ranks_average_ties(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw UsageError("quantile_linear: empty input");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile_linear: q must be in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

QuantileReport tail_quantiles(std::span<const MarginEstimate> margins,
                              std::span<const double> levels, const TestConfig& cfg) {
  if (margins.empty()) throw UsageError("tail_quantiles: no margins");
  cfg.validate();
  const auto abs_d = abs_margins(margins);

  QuantileReport report;
  report.pair_count = margins.size();
  report.power = cfg.power;
  for (double level : levels) {
    QuantileRow row;
    row.level = level;
    row.abs_margin = quantile_linear(abs_d, level);
    TestConfig c05{0.05, cfg.power};
    TestConfig c01{0.01, cfg.power};
    row.n_alpha05 = implied_budget(row.abs_margin, c05).value_or(-1);
    row.n_alpha01 = implied_budget(row.abs_margin, c01).value_or(-1);
    report.rows.push_back(row);
  }
  return report;
}

NearTieReport near_tie_filter(std::span<const MarginEstimate> margins, double tau,
                              const TestConfig& cfg) {
  if (margins.empty()) throw UsageError("near_tie_filter: no margins");
  if (!(tau > 0.0 && tau < 0.5)) throw std::domain_error("near_tie_filter: tau must be in (0,0.5)");
  cfg.validate();

  std::vector<double> subset;
  for (const auto& m : margins) {
    const double a = std::abs(m.delta_hat);
    if (a <= tau) subset.push_back(a);
  }

  NearTieReport report;
  report.tau = tau;
  report.analyzed = margins.size();
  report.count = subset.size();
  report.proportion = static_cast<double>(subset.size()) / static_cast<double>(margins.size());
  if (!subset.empty()) {
    report.median_abs_margin = quantile_linear(subset, 0.5);
    TestConfig c05{0.05, cfg.power};
    report.implied_n_alpha05 = implied_budget(*report.median_abs_margin, c05);
  }
  return report;
}

BootstrapCi bootstrap_quantile_ci(std::span<const MarginEstimate> margins, double level_q,
                                  std::size_t replicates, double ci, std::uint64_t seed) {
  if (margins.size() < 2) throw UsageError("bootstrap_quantile_ci: need at least 2 margins");
  if (!(ci > 0.0 && ci < 1.0)) throw std::domain_error("bootstrap_quantile_ci: ci must be in (0,1)");
  if (replicates < 1) throw UsageError("bootstrap_quantile_ci: replicates must be >= 1");

  const auto abs_d = abs_margins(margins);
  const std::size_t n = abs_d.size();

  std::vector<double> stats(replicates);
  std::vector<double> sample(n);
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    Rng rng(derive_seed(seed, 0x626F6F74ULL, rep));  // per-replicate stream
    for (std::size_t i = 0; i < n; ++i) sample[i] = abs_d[rng.below(n)];
    stats[rep] = quantile_linear(sample, level_q);
  }

  BootstrapCi out;
  out.level = ci;
  out.point = quantile_linear(abs_d, level_q);
  out.lower = quantile_linear(stats, (1.0 - ci) / 2.0);
  out.upper = quantile_linear(stats, 1.0 - (1.0 - ci) / 2.0);
  out.replicates = replicates;
  out.seed = seed;
  return out;
}

TieRateStats tie_rate_stats(const Dataset& ds, std::int64_t min_decisive) {
  TieRateStats out;
  for (const auto& pair : list_pairs(ds)) {
    const auto agg = aggregate(ds, pair);
    if (agg.decisive() < min_decisive || agg.decisive() < 1) continue;
    TieRateRow row;
    row.pair = pair;
    row.tie_rate = static_cast<double>(agg.ties) / static_cast<double>(agg.total());
    row.abs_margin = std::abs(estimate_margin(agg, TiePolicy::kDrop).delta_hat);
    out.rows.push_back(row);
  }
  if (out.rows.size() < 2)
    throw UsageError("tie_rate_stats: need at least 2 qualifying pairs");

  std::vector<double> rates, margins;
  for (const auto& r : out.rows) {
    rates.push_back(r.tie_rate);
    margins.push_back(r.abs_margin);
  }
  try {
    out.correlation = pearson_correlation(rates, margins);
  } catch (const std::domain_error&) {
    out.correlation = std::nullopt;  // constant rates or margins
  }
  return out;
}

StabilityReport early_late_stability(const Dataset& ds, std::int64_t window) {
  if (window < 1) throw UsageError("early_late_stability: window must be >= 1");
  StabilityReport report;
  report.window = window;

  for (const auto& pair : list_pairs(ds)) {
    const auto outcomes = decisive_outcomes(ds, pair);
    if (static_cast<std::int64_t>(outcomes.size()) < 2 * window) {
      report.skipped.push_back(pair);
      continue;
    }
    auto margin_of = [](auto begin, auto end) {
      const double n = static_cast<double>(std::distance(begin, end));
      double wins = 0;
      for (auto it = begin; it != end; ++it) wins += *it;
      return wins / n - 0.5;
    };
    StabilityRow row;
    row.pair = pair;
    row.early_delta = margin_of(outcomes.begin(), outcomes.begin() + window);
    row.late_delta = margin_of(outcomes.end() - window, outcomes.end());
    report.rows.push_back(row);
  }

  if (report.rows.size() >= 2) {
    std::vector<double> early, late, abs_shift_sign;
    for (const auto& r : report.rows) {
      early.push_back(r.early_delta);
      late.push_back(r.late_delta);
    }
    try {
      report.spearman = spearman_rho(early, late);
    } catch (const std::domain_error&) {
      report.spearman = std::nullopt;
    }
    // Sign test for a systematic |delta| drift between windows.
    std::int64_t pos = 0, nonzero = 0;
    for (const auto& r : report.rows) {
      const double d = std::abs(r.late_delta) - std::abs(r.early_delta);
      if (d == 0.0) continue;
      ++nonzero;
      if (d > 0.0) ++pos;
    }
    if (nonzero > 0) report.sign_test_p = exact_binomial_test(pos, nonzero);
  }
  return report;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("pearson_correlation: length mismatch");
  if (x.size() < 2) throw UsageError("pearson_correlation: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::domain_error("pearson_correlation: constant input");
  return sxy / std::sqrt(sxx * syy);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman_rho: length mismatch");
  if (x.size() < 2) throw UsageError("spearman_rho: need at least 2 points");
  const auto rx = ranks_average_ties(x);
  const auto ry = ranks_average_ties(y);
  return pearson_correlation(rx, ry);
}

}  // namespace prefpower
