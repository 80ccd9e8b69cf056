#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "prefpower/allocation.hpp"
#include "prefpower/errors.hpp"

using namespace prefpower;

namespace {

PromptTypeModel uniform_model(std::size_t m, std::vector<double> deltas) {
  PromptTypeModel model;
  model.weights.assign(m, 1.0 / static_cast<double>(m));
  model.deltas = std::move(deltas);
  return model;
}

// The concentrated regime: one of twenty types carries all the signal.
PromptTypeModel concentrated_model(double signal = 0.25) {
  std::vector<double> deltas(20, 0.0);
  deltas[7] = signal;
  return uniform_model(20, deltas);
}

PromptTypeModel diffuse_model(double signal = 0.05) {
  return uniform_model(20, std::vector<double>(20, signal));
}

}  // namespace

TEST_CASE("proportional_allocate") {
  CHECK(proportional_allocate(std::vector<double>(4, 0.25), 100) ==
        std::vector<std::int64_t>{25, 25, 25, 25});
  CHECK(proportional_allocate(std::vector<double>{0.5, 0.3, 0.2}, 10) ==
        std::vector<std::int64_t>{5, 3, 2});

  // Random weights: totals conserved, each count within 1 of the exact share,
  // and equal to an independently coded largest-remainder oracle.
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t m = 2 + gen() % 8;
    std::vector<double> w(m);
    double sum = 0;
    for (auto& x : w) {
      x = 0.05 + static_cast<double>(gen() % 1000) / 1000.0;
      sum += x;
    }
    for (auto& x : w) x /= sum;
    const std::int64_t budget = static_cast<std::int64_t>(gen() % 5000 + m);

    const auto counts = proportional_allocate(w, budget);
    CHECK(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) == budget);
    for (std::size_t i = 0; i < m; ++i)
      CHECK(std::abs(static_cast<double>(counts[i]) - static_cast<double>(budget) * w[i]) <=
            1.0 + 1e-9);

    // Oracle: sort fractional parts descending and hand out the remainder.
    std::vector<std::int64_t> oracle(m);
    std::vector<std::pair<double, std::size_t>> frac(m);
    std::int64_t base_total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double exact = static_cast<double>(budget) * w[i];
      oracle[i] = static_cast<std::int64_t>(std::floor(exact));
      frac[i] = {exact - std::floor(exact), i};
      base_total += oracle[i];
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::int64_t r = 0; r < budget - base_total; ++r) oracle[frac[static_cast<std::size_t>(r)].second]++;
    CHECK(counts == oracle);
  }
}

TEST_CASE("allocation_bottleneck") {
  const std::vector<double> w = {0.5, 0.3, 0.2};
  CHECK(allocation_bottleneck(std::vector<std::int64_t>{50, 30, 20}, w) ==
        doctest::Approx(100.0));
  CHECK(allocation_bottleneck(std::vector<std::int64_t>{100, 0, 50}, w) == 0.0);

  std::mt19937_64 gen(17);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::int64_t> counts(3);
    for (auto& c : counts) c = static_cast<std::int64_t>(gen() % 100);
    double want = 1e300;
    for (std::size_t i = 0; i < 3; ++i)
      want = std::min(want, static_cast<double>(counts[i]) / w[i]);
    CHECK(allocation_bottleneck(counts, w) == doctest::Approx(want));
  }
}

TEST_CASE("proportional allocation maximizes the bottleneck up to rounding") {
  const std::vector<double> w = {0.45, 0.25, 0.2, 0.1};
  const std::int64_t budget = 500;
  const auto prop = proportional_allocate(w, budget);
  const double lambda_prop = allocation_bottleneck(prop, w);
  const double slack = 1.0 / 0.1;  // one judgment in the rarest type

  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 1000; ++rep) {
    // Random composition of the budget.
    std::vector<std::int64_t> counts(4, 0);
    for (std::int64_t j = 0; j < budget; ++j) counts[gen() % 4]++;
    CHECK(allocation_bottleneck(counts, w) <= lambda_prop + slack + 1e-9);
  }
}

TEST_CASE("top_q_by_squared selection") {
  const std::vector<double> vals = {0.1, -0.3, 0.2, 0.05};
  CHECK(top_q_by_squared(vals, 0.5) == std::vector<std::size_t>{1, 2});
  CHECK(top_q_by_squared(vals, 0.25) == std::vector<std::size_t>{1});
  CHECK(top_q_by_squared(vals, 1.0) == std::vector<std::size_t>{0, 1, 2, 3});
  // ceil(q*m) keeps fractional retentions: 0.3*4 = 1.2 -> 2 types.
  CHECK(top_q_by_squared(vals, 0.3).size() == 2);
  // Ties break to the lower index; sign is irrelevant.
  const std::vector<double> tied = {0.2, -0.2, 0.2};
  CHECK(top_q_by_squared(tied, 0.33) == std::vector<std::size_t>{0});
  CHECK(top_q_by_squared(tied, 0.66) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("diagnostics on a hand-sized fixture") {
  PromptTypeModel model;
  model.weights = {0.4, 0.3, 0.2, 0.1};
  model.deltas = {0.1, -0.2, 0.05, 0.25};
  const std::vector<std::int64_t> counts = {10, 20, 30, 40};
  const std::vector<std::size_t> selected = {0, 3};
  const std::vector<double> estimates = {0.15, -0.1, 0.0, 0.3};

  const auto d = diagnostics(model, 0.5, counts, selected, estimates);

  // Brute force: w*d^2 = {0.004, 0.012, 0.0005, 0.00625}; oracle top-2 is
  // {1, 3}; all remaining fields follow by direct arithmetic.
  CHECK(d.lambda == doctest::Approx(25.0));  // min(10/0.4, 20/0.3, 30/0.2, 40/0.1)
  CHECK(d.mu2 == doctest::Approx(0.02275));
  CHECK(d.mu2_q == doctest::Approx((0.012 + 0.00625) / 0.4));
  CHECK(d.kappa == doctest::Approx((0.09 + 0.0225) / (0.5 * 0.1225)));
  CHECK(d.jaccard == doctest::Approx(1.0 / 3.0));
  CHECK(d.signal_mass == doctest::Approx(0.01025 / 0.02275));
  CHECK(d.error_floor == doctest::Approx(0.5 * std::exp(-0.02275 * 25.0)));

  // Selected set equal to the oracle set has full overlap.
  const auto oracle = oracle_top_q(model, 0.5);
  const auto d2 = diagnostics(model, 0.5, counts, oracle, estimates);
  CHECK(d2.jaccard == 1.0);
}

TEST_CASE("two_stage_allocate mechanics") {
  const auto model = concentrated_model();
  Rng rng(404);
  const auto trial = two_stage_allocate(model, 2000, 50, 0.1, 0.05, rng);

  // Budget conservation and stage-2 purity.
  const auto stage1 =
      std::accumulate(trial.stage1_counts.begin(), trial.stage1_counts.end(), std::int64_t{0});
  const auto stage2 =
      std::accumulate(trial.stage2_counts.begin(), trial.stage2_counts.end(), std::int64_t{0});
  CHECK(stage1 == 20 * 50);
  CHECK(stage1 + stage2 == 2000);
  CHECK(trial.test_n == stage2);
  CHECK(trial.selected.size() == 2);
  for (std::size_t i = 0; i < trial.stage2_counts.size(); ++i) {
    const bool in_selected =
        std::find(trial.selected.begin(), trial.selected.end(), i) != trial.selected.end();
    if (!in_selected) CHECK(trial.stage2_counts[i] == 0);
  }

  CHECK_THROWS_AS(two_stage_allocate(model, 999, 50, 0.1, 0.05, rng), InfeasibleError);

  // Pool-backed variant: same mechanics, draws without replacement.
  ReplayPool pool;
  for (int i = 0; i < 10; ++i) {
    pool.labels.push_back("t" + std::to_string(i));
    pool.totals.push_back(300);
    pool.wins.push_back(i == 4 ? 240 : 150);
  }
  Rng pool_rng(7);
  const auto pt = two_stage_allocate(pool, 800, 30, 0.2, 0.05, pool_rng);
  CHECK(std::accumulate(pt.stage1_counts.begin(), pt.stage1_counts.end(), std::int64_t{0}) +
            pt.test_n ==
        800);
  CHECK(pt.selected.size() == 2);
  CHECK_THROWS_AS(two_stage_allocate(pool, 4000, 30, 0.2, 0.05, pool_rng), InfeasibleError);
}

TEST_CASE("screening recovers a concentrated type, monotone in b") {
  const auto model = concentrated_model(0.25);
  const std::size_t trials = 400;
  std::vector<double> containment;
  for (std::int64_t b : {5, 20, 60}) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(std::uint64_t{777}, static_cast<std::uint64_t>(b), t));
      const auto trial = two_stage_allocate(model, 20 * b + 400, b, 0.1, 0.05, rng);
      for (std::size_t i : trial.selected)
        if (i == 7) ++hits;
    }
    containment.push_back(static_cast<double>(hits) / static_cast<double>(trials));
  }
  CHECK(containment[0] <= containment[1] + 0.05);
  CHECK(containment[1] <= containment[2] + 0.05);
  CHECK(containment[2] > 0.95);
  // A positive fitted screening-failure exponent: failure rate well below
  // the trivial bound at the generous budget.
  const double failure = 1.0 - containment[2];
  CHECK(failure < 0.5);
}

TEST_CASE("simulate_power: null calibration for both policies") {
  const auto null_model = uniform_model(10, std::vector<double>(10, 0.0));
  const auto prop =
      simulate_power(null_model, AllocationPolicy::proportional(), 1000, 0.05, 2000, 5);
  const auto two =
      simulate_power(null_model, AllocationPolicy::two_stage(20, 0.2), 1000, 0.05, 2000, 6);
  const double se = std::sqrt(0.05 * 0.95 / 2000.0);
  CHECK(prop.power <= 0.05 + 3 * se);
  CHECK(two.power <= 0.05 + 3 * se);
}

TEST_CASE("simulate_power: concentrated vs diffuse regime ordering") {
  // Concentrated: two-stage clearly ahead at the same budget.
  const auto conc = concentrated_model(0.25);
  const auto conc_prop =
      simulate_power(conc, AllocationPolicy::proportional(), 2000, 0.05, 600, 41);
  const auto conc_two =
      simulate_power(conc, AllocationPolicy::two_stage(50, 0.1), 2000, 0.05, 600, 42);
  CHECK(conc_two.power - conc_prop.power >= 0.05);

  // Diffuse: screening spends budget without concentrating anything.
  const auto diff = diffuse_model(0.05);
  const auto diff_prop =
      simulate_power(diff, AllocationPolicy::proportional(), 2000, 0.05, 600, 43);
  const auto diff_two =
      simulate_power(diff, AllocationPolicy::two_stage(50, 0.1), 2000, 0.05, 600, 44);
  CHECK(diff_prop.power >= diff_two.power - 0.04);

  // Diffuse screening captures about a q-fraction of the signal mass.
  REQUIRE(diff_two.signal_mass_mean.has_value());
  CHECK(*diff_two.signal_mass_mean == doctest::Approx(0.1).epsilon(0.5));
  // Concentrated screening captures far more than q.
  REQUIRE(conc_two.signal_mass_mean.has_value());
  CHECK(*conc_two.signal_mass_mean > 0.5);
}

TEST_CASE("simulate_power: power monotone in budget") {
  const auto model = diffuse_model(0.06);
  double prev = 0.0;
  for (std::int64_t budget : {500, 1500, 4000}) {
    const auto s = simulate_power(model, AllocationPolicy::proportional(), budget, 0.05, 800, 9);
    CHECK(s.power >= prev - 0.04);
    prev = s.power;
  }
}

TEST_CASE("simulate_power determinism") {
  const auto model = diffuse_model(0.05);
  const auto a = simulate_power(model, AllocationPolicy::two_stage(30, 0.2), 1500, 0.05, 300, 77);
  const auto b = simulate_power(model, AllocationPolicy::two_stage(30, 0.2), 1500, 0.05, 300, 77);
  CHECK(a.power == b.power);
  CHECK(a.jaccard_mean == b.jaccard_mean);
  CHECK(a.kappa_mean == b.kappa_mean);
}

TEST_CASE("m=1, q=1 degenerates to proportional at the stage-2 budget") {
  PromptTypeModel single;
  single.weights = {1.0};
  single.deltas = {0.15};
  const std::int64_t budget = 260, b = 60;
  const auto two = simulate_power(single, AllocationPolicy::two_stage(b, 1.0), budget, 0.05,
                                  3000, 15);
  // Stage 2 holds budget-b judgments of the single type, so the decision
  // distribution matches proportional allocation at that sample size.
  const auto prop = simulate_power(single, AllocationPolicy::proportional(), budget - b, 0.05,
                                   3000, 16);
  CHECK(std::abs(two.power - prop.power) < 0.04);
}

TEST_CASE("offline_replay matches model simulation on a single-type pool") {
  // Large i.i.d. pool at p = 0.55; without-replacement draws of B << pool
  // behave like the Bernoulli model.
  ReplayPool pool;
  pool.labels = {"all"};
  pool.totals = {100000};
  pool.wins = {55000};

  PromptTypeModel model;
  model.weights = {1.0};
  model.deltas = {0.05};

  const std::int64_t budget = 500;
  const auto replayed = offline_replay(pool, AllocationPolicy::proportional(), budget,
                                       {.alpha = 0.05, .trials = 2000, .seed = 3});
  const auto simulated =
      simulate_power(model, AllocationPolicy::proportional(), budget, 0.05, 2000, 4);
  CHECK(std::abs(replayed.power - simulated.power) < 0.05);
}

TEST_CASE("offline_replay regime ordering and pool guards") {
  std::mt19937_64 gen(8);
  auto make_pool = [&](const std::vector<double>& deltas, std::int64_t per_type) {
    ReplayPool pool;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      pool.labels.push_back("t" + std::to_string(i));
      pool.totals.push_back(per_type);
      std::int64_t wins = 0;
      for (std::int64_t j = 0; j < per_type; ++j)
        wins += (static_cast<double>(gen() % 1000000) / 1000000.0 < 0.5 + deltas[i]) ? 1 : 0;
      pool.wins.push_back(wins);
    }
    return pool;
  };

  // Concentrated pool: one of ten types carries a large margin.
  std::vector<double> conc(10, 0.0);
  conc[3] = 0.25;
  const auto conc_pool = make_pool(conc, 2000);
  const auto conc_prop = offline_replay(conc_pool, AllocationPolicy::proportional(), 1500,
                                        {.alpha = 0.05, .trials = 500, .seed = 21});
  const auto conc_two = offline_replay(conc_pool, AllocationPolicy::two_stage(40, 0.1), 1500,
                                       {.alpha = 0.05, .trials = 500, .seed = 22});
  CHECK(conc_two.power >= conc_prop.power);

  // Diffuse pool: no mean improvement from screening.
  const auto diff_pool = make_pool(std::vector<double>(10, 0.05), 2000);
  const auto diff_prop = offline_replay(diff_pool, AllocationPolicy::proportional(), 1500,
                                        {.alpha = 0.05, .trials = 500, .seed = 23});
  const auto diff_two = offline_replay(diff_pool, AllocationPolicy::two_stage(40, 0.1), 1500,
                                       {.alpha = 0.05, .trials = 500, .seed = 24});
  CHECK(diff_prop.power >= diff_two.power - 0.05);

  // Budget beyond the pool is infeasible.
  CHECK_THROWS_AS(offline_replay(diff_pool, AllocationPolicy::proportional(), 20001,
                                 {.alpha = 0.05, .trials = 10, .seed = 1}),
                  InfeasibleError);
  // Strict mode refuses exhausted types; the default redistributes. With
  // empirical weights, proportional allocation never overdraws a type, so
  // exhaustion arises in stage 2 of the two-stage policy, where screening
  // can eat most of a small type's pool.
  ReplayPool tiny;
  tiny.labels = {"a", "b"};
  tiny.totals = {30, 1000};
  tiny.wins = {28, 520};
  const auto keep_all = AllocationPolicy::two_stage(25, 1.0);
  CHECK_THROWS_AS(offline_replay(tiny, keep_all, 900,
                                 {.alpha = 0.05, .trials = 5, .seed = 2, .strict_pool = true}),
                  InfeasibleError);
  const auto relaxed =
      offline_replay(tiny, keep_all, 900, {.alpha = 0.05, .trials = 5, .seed = 2});
  CHECK(relaxed.trials == 5);
  CHECK(relaxed.power >= 0.0);
  // When every retained type is exhausted the budget cannot be preserved,
  // relaxed mode or not.
  const auto keep_small = AllocationPolicy::two_stage(25, 0.5);
  CHECK_THROWS_AS(
      offline_replay(tiny, keep_small, 900, {.alpha = 0.05, .trials = 5, .seed = 2}),
      InfeasibleError);
}

TEST_CASE("build_replay_pool groups decisive judgments by prompt type") {
  Dataset ds;
  ds.records.push_back({"a", "b", "p1", "chat", Outcome::kBWins, std::nullopt});
  ds.records.push_back({"a", "b", "p2", "chat", Outcome::kAWins, std::nullopt});
  ds.records.push_back({"a", "b", "p3", "chat", Outcome::kTie, std::nullopt});
  // Reversed orientation: model_a "b" is the canonical second, so A_WINS
  // counts as a second-model win.
  ds.records.push_back({"b", "a", "p4", "code", Outcome::kAWins, std::nullopt});
  ds.records.push_back({"x", "y", "p5", "chat", Outcome::kBWins, std::nullopt});

  const auto pool = build_replay_pool(ds, PairKey::of("a", "b"));
  REQUIRE(pool.labels.size() == 2);
  CHECK(pool.labels[0] == "chat");
  CHECK(pool.totals[0] == 2);
  CHECK(pool.wins[0] == 1);
  CHECK(pool.labels[1] == "code");
  CHECK(pool.totals[1] == 1);
  CHECK(pool.wins[1] == 1);
  CHECK(pool.total() == 3);
}

TEST_CASE("model validation") {
  PromptTypeModel bad;
  bad.weights = {0.6, 0.6};
  bad.deltas = {0.1, 0.1};
  CHECK_THROWS_AS(bad.validate(), UsageError);
  bad.weights = {0.5, 0.5};
  bad.deltas = {0.3, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  CHECK_THROWS_AS(AllocationPolicy::two_stage(0, 0.2), UsageError);
  CHECK_THROWS_AS(AllocationPolicy::two_stage(10, 1.5), UsageError);
  CHECK(default_screening_budget(20) == 30);  // ceil(10 ln 20)
  CHECK(default_screening_budget(1) == 1);
}
