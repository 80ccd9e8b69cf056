#include "prefpower/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prefpower/errors.hpp"

namespace prefpower {

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must be in (0,1)");
  if (!(power > 0.0 && power < 1.0)) throw std::domain_error("power must be in (0,1)");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Acklam's rational approximation to the inverse normal CDF (~1.15e-9
// relative error), used as the starting point for one Halley refinement.
double acklam_initial(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("normal_quantile: q must be in (0,1)");
  if (q == 0.5) return 0.0;
  double x = acklam_initial(q);
  // One Halley step on f(x) = Phi(x) - q.
  const double e = normal_cdf(x) - q;
  const double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double sample_size_constant(const TestConfig& cfg) {
  cfg.validate();
  const double z_alpha = normal_quantile(1.0 - cfg.alpha / 2.0);
  const double z_power = normal_quantile(cfg.power);
  const double s = z_alpha + z_power;
  return s * s / 4.0;
}

std::int64_t required_sample_size(double delta, const TestConfig& cfg) {
  cfg.validate();
  if (delta == 0.0)
    throw InfeasibleError("required_sample_size: zero margin needs an infinite budget");
  if (std::abs(delta) >= 0.5)
    throw std::domain_error("required_sample_size: |delta| must be < 0.5");
  const double n = sample_size_constant(cfg) / (delta * delta);
  return static_cast<std::int64_t>(std::ceil(n));
}

double closed_form_power(double delta, std::int64_t n, double alpha) {
  if (n < 1) throw std::domain_error("closed_form_power: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("closed_form_power: bad alpha");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double shift = 2.0 * std::abs(delta) * std::sqrt(static_cast<double>(n));
  const double p = normal_cdf(shift - z) + normal_cdf(-shift - z);
  return std::clamp(p, 0.0, 1.0);
}

double bernoulli_kl(double delta) {
  if (std::abs(delta) >= 0.5) throw std::domain_error("bernoulli_kl: |delta| must be < 0.5");
  if (delta == 0.0) return 0.0;
  return (0.5 + delta) * std::log1p(2.0 * delta) + (0.5 - delta) * std::log1p(-2.0 * delta);
}

KlBudgetSummary kl_budget(std::span<const double> deltas) {
  KlBudgetSummary s;
  s.count = deltas.size();
  for (double d : deltas) {
    s.total_kl += bernoulli_kl(d);
    s.sum_squared += d * d;
  }
  s.lower_bound = 2.0 * s.sum_squared;
  s.upper_bound = 2.25 * s.sum_squared;
  return s;
}

double exact_binomial_test(std::int64_t successes, std::int64_t n, double p0) {
  if (n < 1) throw std::domain_error("exact_binomial_test: n must be >= 1");
  if (successes < 0 || successes > n)
    throw std::domain_error("exact_binomial_test: successes out of [0, n]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw std::domain_error("exact_binomial_test: p0 must be in (0,1)");

  // The doubling p-value is symmetric in k <-> n-k at p0 = 1/2; canonicalize
  // so that symmetry holds bitwise.
  if (p0 == 0.5 && successes > n - successes) successes = n - successes;

  // Anchor the pmf at the observed count, then walk each tail with the
  // ratio recurrence; one lgamma evaluation per call instead of one per
  // term.
  const double log_p = std::log(p0);
  const double log_q = std::log1p(-p0);
  const double anchor = std::exp(log_choose(n, successes) +
                                 static_cast<double>(successes) * log_p +
                                 static_cast<double>(n - successes) * log_q);
  const double odds = p0 / (1.0 - p0);

  double lower = anchor;
  double term = anchor;
  for (std::int64_t k = successes; k >= 1; --k) {
    term *= static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
    lower += term;
  }
  double upper = anchor;
  term = anchor;
  for (std::int64_t k = successes; k < n; ++k) {
    term *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    upper += term;
  }

  return std::min(1.0, 2.0 * std::min(lower, upper));
}

BinomialTestPlan::BinomialTestPlan(std::int64_t n, double alpha, double p0) : n_(n) {
  if (n < 1) throw std::domain_error("BinomialTestPlan: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("BinomialTestPlan: bad alpha");
  // The doubling p-value is unimodal in k, so the rejection region is a pair
  // of tails; locate the cut points with the reference p-value itself.
  lower_cut_ = -1;
  for (std::int64_t k = 0; k <= n; ++k) {
    if (exact_binomial_test(k, n, p0) < alpha)
      lower_cut_ = k;
    else
      break;
  }
  upper_cut_ = n + 1;
  for (std::int64_t k = n; k >= 0; --k) {
    if (exact_binomial_test(k, n, p0) < alpha)
      upper_cut_ = k;
    else
      break;
  }
}

LlrDecision llr_test(std::span<const std::uint8_t> outcomes, std::span<const double> deltas,
                     double kl_target) {
  if (outcomes.size() != deltas.size())
    throw UsageError("llr_test: outcomes and deltas must have equal length");
  if (kl_target < 0.0) throw std::domain_error("llr_test: kl_target must be >= 0");
  double stat = 0.0;
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const double d = deltas[t];
    if (std::abs(d) > 0.25) throw std::domain_error("llr_test: |delta| must be <= 0.25");
    stat += outcomes[t] ? std::log1p(2.0 * d) : std::log1p(-2.0 * d);
  }
  LlrDecision r;
  r.statistic = stat;
  r.threshold = 0.5 * kl_target;
  r.reject = stat >= r.threshold;
  return r;
}

double minimax_error_floor(double kl_target) {
  if (kl_target < 0.0) throw std::domain_error("minimax_error_floor: K must be >= 0");
  return 0.5 * std::exp(-kl_target);
}

double detectability_z(double p_hat, std::int64_t n) {
  if (n < 1) throw std::domain_error("detectability_z: n must be >= 1");
  if (p_hat < 0.0 || p_hat > 1.0) throw std::domain_error("detectability_z: p_hat out of [0,1]");
  if (p_hat == 0.0 || p_hat == 1.0) return std::numeric_limits<double>::infinity();
  return std::abs(p_hat - 0.5) / std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
}

}  // namespace prefpower
