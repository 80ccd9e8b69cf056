#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "prefpower/errors.hpp"
#include "prefpower/rng.hpp"
#include "prefpower/stats.hpp"

using namespace prefpower;

namespace {

// Oracle: invert the erfc-based normal CDF by bisection, independent of the
// rational-approximation path under test.
double quantile_by_bisection(double q) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Oracle: exact binomial tail sums via a long-double Pascal recurrence from
// pmf(0), independent of the lgamma-anchored implementation.
long double binom_pmf0(std::int64_t n, long double p) {
  return std::pow(1.0L - p, static_cast<long double>(n));
}

double two_sided_binom_oracle(std::int64_t k, std::int64_t n, long double p = 0.5L) {
  std::vector<long double> pmf(static_cast<std::size_t>(n) + 1);
  pmf[0] = binom_pmf0(n, p);
  for (std::int64_t i = 1; i <= n; ++i)
    pmf[static_cast<std::size_t>(i)] = pmf[static_cast<std::size_t>(i - 1)] *
                                       static_cast<long double>(n - i + 1) /
                                       static_cast<long double>(i) * p / (1.0L - p);
  long double lower = 0.0L, upper = 0.0L;
  for (std::int64_t i = 0; i <= k; ++i) lower += pmf[static_cast<std::size_t>(i)];
  for (std::int64_t i = k; i <= n; ++i) upper += pmf[static_cast<std::size_t>(i)];
  return static_cast<double>(std::min(1.0L, 2.0L * std::min(lower, upper)));
}

}  // namespace

TEST_CASE("normal_quantile matches the CDF-inversion oracle") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-4));
  CHECK(normal_quantile(0.9) == doctest::Approx(1.281552).epsilon(1e-4));
  for (double q : {0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.995, 0.9999}) {
    CHECK(std::abs(normal_quantile(q) - quantile_by_bisection(q)) < 1e-8);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
}

TEST_CASE("sample size constant and golden budgets") {
  const double c = sample_size_constant({});
  CHECK(c > 2.625);
  CHECK(c < 2.63);

  CHECK(required_sample_size(0.05) == 1051);
  CHECK(required_sample_size(0.06) == 730);   // the closed form rounds to 731 at 2 digits
  CHECK(required_sample_size(0.190) == 73);
  CHECK(required_sample_size(0.3) == 30);
  CHECK(required_sample_size(0.02) == 6568);
  CHECK(required_sample_size(0.4999) == 11);
  CHECK(required_sample_size(-0.05) == 1051);  // sign-free

  CHECK_THROWS_AS(required_sample_size(0.0), InfeasibleError);
  CHECK_THROWS_AS(required_sample_size(0.5), std::domain_error);
  CHECK_THROWS_AS(required_sample_size(0.1, TestConfig{0.0, 0.9}), std::domain_error);
}

TEST_CASE("required_sample_size monotonicity and quadratic scaling") {
  std::int64_t prev = required_sample_size(0.01);
  for (double d = 0.02; d < 0.45; d += 0.01) {
    const std::int64_t n = required_sample_size(d);
    CHECK(n <= prev);
    prev = n;
  }
  // Stricter alpha and higher power both cost budget.
  CHECK(required_sample_size(0.1, {0.01, 0.9}) > required_sample_size(0.1, {0.05, 0.9}));
  CHECK(required_sample_size(0.1, {0.05, 0.95}) > required_sample_size(0.1, {0.05, 0.9}));
  // Halving the margin roughly quadruples the budget.
  for (double d : {0.02, 0.05, 0.1}) {
    const double ratio = static_cast<double>(required_sample_size(d / 2)) /
                         static_cast<double>(required_sample_size(d));
    CHECK(ratio > 3.9);
    CHECK(ratio < 4.1);
  }
}

TEST_CASE("closed_form_power") {
  CHECK(closed_form_power(0.05, 1051, 0.05) == doctest::Approx(0.90).epsilon(0.012));
  CHECK(closed_form_power(0.0, 500, 0.05) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(closed_form_power(0.0, 7, 0.10) == doctest::Approx(0.10).epsilon(1e-9));
  CHECK(closed_form_power(0.4, 2000, 0.05) == doctest::Approx(1.0));
  // Inverse consistency: power at the required budget is about the target.
  for (double d : {0.03, 0.1, 0.2}) {
    const auto n = required_sample_size(d);
    CHECK(closed_form_power(d, n, 0.05) == doctest::Approx(0.9).epsilon(0.01));
  }
}

TEST_CASE("bernoulli_kl values and the quadratic envelope") {
  CHECK(bernoulli_kl(0.0) == 0.0);
  CHECK(bernoulli_kl(0.25) == doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(bernoulli_kl(0.1) == doctest::Approx(0.020136).epsilon(1e-4));
  CHECK(bernoulli_kl(0.1) > 0.02);
  CHECK(bernoulli_kl(0.1) < 0.0225);
  CHECK_THROWS_AS(bernoulli_kl(0.5), std::domain_error);
  CHECK_THROWS_AS(bernoulli_kl(-0.6), std::domain_error);

  // Even, increasing in |d|, and inside [2 d^2, 2.25 d^2] on a dense grid.
  double prev = -1.0;
  for (int i = 0; i < 2001; ++i) {
    const double d = -0.25 + 0.5 * static_cast<double>(i) / 2000.0;
    const double kl = bernoulli_kl(d);
    CHECK(kl == bernoulli_kl(-d));
    CHECK(kl >= 2.0 * d * d);
    CHECK(kl <= 2.25 * d * d);
    if (d >= 0.0) {
      CHECK(kl >= prev);
      prev = kl;
    }
  }
}

TEST_CASE("kl_budget") {
  const auto empty = kl_budget({});
  CHECK(empty.total_kl == 0.0);
  CHECK(empty.count == 0);

  const std::vector<double> quad(4, 0.25);
  CHECK(kl_budget(quad).total_kl == doctest::Approx(0.523248).epsilon(1e-5));

  const std::vector<double> mixed = {0.0, 0.1, 0.25};
  const auto s = kl_budget(mixed);
  CHECK(s.total_kl == doctest::Approx(0.150948).epsilon(1e-5));
  CHECK(s.count == 3);
  CHECK(s.lower_bound <= s.total_kl);
  CHECK(s.upper_bound >= s.total_kl);
  CHECK(s.sum_squared == doctest::Approx(0.0 + 0.01 + 0.0625));
}

TEST_CASE("exact_binomial_test against the Pascal-recurrence oracle") {
  CHECK(exact_binomial_test(10, 10) == doctest::Approx(0.001953125).epsilon(1e-9));
  CHECK(exact_binomial_test(5, 10) == 1.0);
  CHECK(exact_binomial_test(60, 100) == doctest::Approx(0.056888).epsilon(1e-4));

  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 200; ++rep) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(gen() % 400);
    const std::int64_t k = static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(n + 1));
    const double got = exact_binomial_test(k, n);
    const double want = two_sided_binom_oracle(k, n);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    CHECK(got > 0.0);
    CHECK(got <= 1.0);
    // Symmetry at p0 = 1/2 holds exactly.
    CHECK(got == exact_binomial_test(n - k, n));
  }
  // Off-center null.
  CHECK(exact_binomial_test(9, 10, 0.8) == doctest::Approx(two_sided_binom_oracle(9, 10, 0.8L)));
}

TEST_CASE("BinomialTestPlan agrees with the p-value everywhere") {
  for (std::int64_t n : {1, 5, 17, 100, 263}) {
    BinomialTestPlan plan(n, 0.05);
    for (std::int64_t k = 0; k <= n; ++k)
      CHECK(plan.rejects(k) == (exact_binomial_test(k, n) < 0.05));
  }
}

TEST_CASE("llr_test") {
  const std::vector<std::uint8_t> ones = {1};
  const std::vector<double> quarter = {0.25};
  const auto single = llr_test(ones, quarter, 2.0);
  CHECK(single.statistic == doctest::Approx(0.405465).epsilon(1e-5));
  CHECK_FALSE(single.reject);

  const std::vector<std::uint8_t> ys = {1, 0, 1, 1};
  const std::vector<double> zeros(4, 0.0);
  const auto null_margins = llr_test(ys, zeros, 1.0);
  CHECK(null_margins.statistic == 0.0);
  CHECK_FALSE(null_margins.reject);

  CHECK_THROWS_AS(llr_test(ys, quarter, 1.0), UsageError);
  const std::vector<double> too_big = {0.3};
  CHECK_THROWS_AS(llr_test(ones, too_big, 1.0), std::domain_error);
}

TEST_CASE("llr_test null rejection rate is within the Markov bound") {
  // Under the null the rejection probability of the K/2-threshold test is
  // at most e^{-K/2}; check by simulation at K = 2.
  const double kl_target = 2.0;
  const double per_step = bernoulli_kl(0.15);
  const auto steps = static_cast<std::size_t>(std::ceil(kl_target / per_step));
  const std::vector<double> deltas(steps, 0.15);
  std::vector<std::uint8_t> ys(steps);

  const std::size_t trials = 20000;
  std::size_t rejections = 0;
  Rng rng(20250809);
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& y : ys) y = rng.bernoulli(0.5) ? 1 : 0;
    if (llr_test(ys, deltas, kl_target).reject) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / static_cast<double>(trials);
  const double bound = std::exp(-kl_target / 2.0);
  const double se = std::sqrt(bound * (1.0 - bound) / static_cast<double>(trials));
  CHECK(rate <= bound + 3.0 * se);
}

TEST_CASE("minimax_error_floor") {
  CHECK(minimax_error_floor(0.0) == 0.5);
  CHECK(minimax_error_floor(std::log(2.0)) == doctest::Approx(0.25));
  // Composed with the KL budget of the hard near-tie design point, the
  // floor is far below the working error rates.
  const std::vector<double> stream(1051, 0.05);
  const auto k = kl_budget(stream);
  CHECK(minimax_error_floor(k.total_kl) < 0.05);
  CHECK_THROWS_AS(minimax_error_floor(-1.0), std::domain_error);
}

TEST_CASE("detectability_z") {
  CHECK(detectability_z(0.5, 10) == 0.0);
  CHECK(detectability_z(0.5, 100000) == 0.0);
  CHECK(detectability_z(0.6, 100) == doctest::Approx(2.0412).epsilon(1e-4));
  CHECK(detectability_z(0.56, 50) == doctest::Approx(0.854704).epsilon(1e-4));
  CHECK(std::isinf(detectability_z(1.0, 20)));
  CHECK(std::isinf(detectability_z(0.0, 20)));
  CHECK_THROWS_AS(detectability_z(0.5, 0), std::domain_error);
}

TEST_CASE("exact test power at the required budget" * doctest::skip(false)) {
  // Scaled-down check of the calibration the acceptance suite runs at 1e4
  // trials: empirical power at n = required_sample_size(0.1) stays near 0.9.
  const std::int64_t n = required_sample_size(0.1);
  BinomialTestPlan plan(n, 0.05);
  const std::size_t trials = 4000;
  std::size_t rejections = 0;
  Rng rng(99);
  for (std::size_t t = 0; t < trials; ++t) {
    if (plan.rejects(rng.binomial(n, 0.6))) ++rejections;
  }
  const double power = static_cast<double>(rejections) / static_cast<double>(trials);
  CHECK(power > 0.86);
  CHECK(power < 0.94);
}
