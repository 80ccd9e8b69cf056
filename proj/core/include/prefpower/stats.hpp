#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prefpower {

// Two-sided test configuration.
struct TestConfig {
  double alpha = 0.05;   // significance level, in (0,1)
  double power = 0.90;   // target power 1-beta, in (0,1)

  void validate() const;  // throws std::domain_error when out of range
};

// KL divergence accumulated across a judgment stream, with the quadratic
// envelope 2*sum(d^2) <= total <= (9/4)*sum(d^2) valid for all |d| <= 1/4.
// sum_squared (= B * mean(d^2)) is the scale that governs expected budgets.
struct KlBudgetSummary {
  double total_kl = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double sum_squared = 0.0;
  std::size_t count = 0;
};

struct LlrDecision {
  double statistic = 0.0;  // log-likelihood ratio L
  double threshold = 0.0;  // K/2
  bool reject = false;     // L >= K/2
};

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF for q in (0,1). Rational initial guess
// (Acklam) refined by one Halley step; absolute error well under 1e-10.
double normal_quantile(double q);

// (z_{1-alpha/2} + z_{power})^2 / 4, the constant C in n = C / delta^2.
double sample_size_constant(const TestConfig& cfg);

// Decisive judgments needed to detect margin delta at cfg's level and power,
// rounded up. Throws InfeasibleError for delta == 0, std::domain_error for
// |delta| >= 0.5.
std::int64_t required_sample_size(double delta, const TestConfig& cfg = {});

// Normal-approximation power of the two-sided test at margin delta and
// sample size n: Phi(2|d|sqrt(n) - z) + Phi(-2|d|sqrt(n) - z). The mirror
// term keeps the null case equal to alpha; it is negligible elsewhere.
double closed_form_power(double delta, std::int64_t n, double alpha);

// KL(Bern(1/2+delta) || Bern(1/2)) in nats; requires |delta| < 0.5.
double bernoulli_kl(double delta);

KlBudgetSummary kl_budget(std::span<const double> deltas);

// Two-sided exact binomial p-value: twice the smaller tail, capped at 1.
double exact_binomial_test(std::int64_t successes, std::int64_t n, double p0 = 0.5);

// Precomputed rejection region of the two-sided exact test at fixed (n,
// alpha, p0); identical verdicts to exact_binomial_test(k, n, p0) < alpha.
// Use inside Monte-Carlo loops where the per-k p-value would dominate.
class BinomialTestPlan {
 public:
  BinomialTestPlan(std::int64_t n, double alpha, double p0 = 0.5);

  bool rejects(std::int64_t successes) const {
    return successes <= lower_cut_ || successes >= upper_cut_;
  }
  std::int64_t n() const { return n_; }

 private:
  std::int64_t n_;
  std::int64_t lower_cut_;  // reject when k <= lower_cut_ (-1: never)
  std::int64_t upper_cut_;  // reject when k >= upper_cut_ (n+1: never)
};

// Likelihood-ratio test against the indifferent null: statistic
// L = sum_t [y_t ln(1+2d_t) + (1-y_t) ln(1-2d_t)], rejecting when
// L >= kl_target/2. Requires |d_t| <= 1/4 and matching lengths.
LlrDecision llr_test(std::span<const std::uint8_t> outcomes, std::span<const double> deltas,
                     double kl_target);

// Unavoidable total-error floor (type I + type II) at KL budget K: e^{-K}/2.
double minimax_error_floor(double kl_target);

// |p_hat - 1/2| / sqrt(p_hat (1-p_hat) / n). Degenerate aggregates
// (p_hat in {0,1}) return +infinity.
double detectability_z(double p_hat, std::int64_t n);

}  // namespace prefpower
