#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "prefpower/errors.hpp"
#include "prefpower/planner.hpp"
#include "prefpower/scenario.hpp"

using namespace prefpower;

namespace {

PairAggregate pilot(std::int64_t wins_first, std::int64_t wins_second, std::int64_t ties = 0) {
  PairAggregate agg;
  agg.pair = PairKey::of("candidate", "incumbent");
  agg.wins_first = wins_first;
  agg.wins_second = wins_second;
  agg.ties = ties;
  return agg;
}

}  // namespace

TEST_CASE("pilot_assess worked example: p_hat 0.56 from 50, budget 500") {
  const auto report = pilot_assess(pilot(22, 28), {0.05, 0.9}, 500);
  CHECK(report.p_hat == doctest::Approx(0.56));
  CHECK(report.delta_hat == doctest::Approx(0.06));
  REQUIRE(report.required_n.has_value());
  CHECK(std::abs(*report.required_n - 731) <= 2);  // exact quantiles give 730
  CHECK(report.verdict == Verdict::kUnderpowered);
  CHECK(report.narrative.find("budget") != std::string::npos);
  CHECK(report.warnings.empty());
}

TEST_CASE("pilot_assess strong signal is feasible") {
  const auto report = pilot_assess(pilot(10, 40), {0.05, 0.9}, 100);
  CHECK(report.delta_hat == doctest::Approx(0.3));
  REQUIRE(report.required_n.has_value());
  CHECK(*report.required_n == 30);
  CHECK(report.verdict == Verdict::kFeasible);
}

TEST_CASE("pilot_assess near-tie pilot advises a protocol switch") {
  const auto report = pilot_assess(pilot(24, 26), {0.05, 0.9}, 6000);
  CHECK(report.delta_hat == doctest::Approx(0.02));
  REQUIRE(report.required_n.has_value());
  CHECK(*report.required_n == 6568);
  CHECK(report.verdict == Verdict::kSwitchProtocol);

  // A budget that covers the requirement flips the verdict to feasible.
  const auto funded = pilot_assess(pilot(24, 26), {0.05, 0.9}, 6568);
  CHECK(funded.verdict == Verdict::kFeasible);
}

TEST_CASE("pilot_assess edge cases and warnings") {
  // Zero-margin pilot: no finite budget works; low-signal advice wins.
  const auto tied = pilot_assess(pilot(25, 25), {0.05, 0.9}, 100000);
  CHECK_FALSE(tied.required_n.has_value());
  CHECK(tied.verdict == Verdict::kSwitchProtocol);

  // Pilot size warnings outside [30, 100].
  CHECK_FALSE(pilot_assess(pilot(5, 15), {0.05, 0.9}, 100).warnings.empty());
  CHECK_FALSE(pilot_assess(pilot(80, 120), {0.05, 0.9}, 1000).warnings.empty());

  CHECK_THROWS_AS(pilot_assess(pilot(0, 0, 10), {0.05, 0.9}, 100), InfeasibleError);
  CHECK_THROWS_AS(pilot_assess(pilot(20, 30), {0.05, 0.9}, -1), UsageError);
}

TEST_CASE("verdict monotonicity in budget and margin") {
  // Raising the budget never demotes FEASIBLE.
  bool was_feasible = false;
  for (std::int64_t budget : {10, 50, 200, 800, 3000}) {
    const auto r = pilot_assess(pilot(20, 30), {0.05, 0.9}, budget);
    if (was_feasible) CHECK(r.verdict == Verdict::kFeasible);
    if (r.verdict == Verdict::kFeasible) was_feasible = true;
  }
  CHECK(was_feasible);

  // Larger |delta| never needs a bigger budget.
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t wins : {27, 30, 35, 40, 45}) {
    const auto r = pilot_assess(pilot(50 - wins, wins), {0.05, 0.9}, 10);
    REQUIRE(r.required_n.has_value());
    CHECK(*r.required_n <= prev);
    prev = *r.required_n;
  }
}

TEST_CASE("allocation_advice decision table") {
  const auto concentrated = allocation_advice(2.0, 10000, 20, 30);
  CHECK(concentrated.choice == PolicyKind::kTwoStage);

  const auto small_budget = allocation_advice(2.0, 500, 20, 30);
  CHECK(small_budget.choice == PolicyKind::kProportional);
  CHECK(small_budget.reason.find("budget") != std::string::npos);

  const auto diffuse = allocation_advice(1.0, 10000, 20, 30);
  CHECK(diffuse.choice == PolicyKind::kProportional);
  CHECK(diffuse.reason.find("diffuse") != std::string::npos);

  // Boundary: kappa must strictly exceed the threshold.
  CHECK(allocation_advice(1.5, 10000, 20, 30).choice == PolicyKind::kProportional);
  CHECK(allocation_advice(1.51, 10000, 20, 30).choice == PolicyKind::kTwoStage);
  // NaN kappa (no signal measured) falls back to proportional.
  CHECK(allocation_advice(std::nan(""), 10000, 20, 30).choice == PolicyKind::kProportional);
}

TEST_CASE("scenario parsing") {
  SUBCASE("valid uniform scenario") {
    std::istringstream in(R"({
      "m": 4,
      "weights": "uniform",
      "deltas": [0.0, 0.1, 0.0, 0.2],
      "budgets": [500, 1000],
      "policy": "both",
      "b": 20,
      "q": 0.25,
      "alpha": 0.05,
      "trials": 100,
      "seed": 7
    })");
    const auto cfg = load_scenario(in);
    CHECK(cfg.model.size() == 4);
    CHECK(cfg.model.weights[0] == doctest::Approx(0.25));
    CHECK(cfg.budgets == std::vector<std::int64_t>{500, 1000});
    CHECK(cfg.run_proportional);
    CHECK(cfg.run_two_stage);
    CHECK(cfg.two_stage_policy().screening_budget == 20);
    CHECK(cfg.seed == 7);
  }
  SUBCASE("explicit weights are normalized") {
    std::istringstream in(R"({
      "m": 2, "weights": [3, 1], "deltas": [0.1, 0.0], "budgets": [100]
    })");
    const auto cfg = load_scenario(in);
    CHECK(cfg.model.weights[0] == doctest::Approx(0.75));
    CHECK(cfg.model.weights[1] == doctest::Approx(0.25));
  }
  SUBCASE("schema error lists every offending key") {
    std::istringstream in(R"({
      "m": 2, "weights": "uniform", "deltas": [0.1],
      "budgets": [], "policy": "zigzag", "mystery": 1
    })");
    try {
      load_scenario(in);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("deltas") != std::string::npos);
      CHECK(msg.find("budgets") != std::string::npos);
      CHECK(msg.find("policy") != std::string::npos);
      CHECK(msg.find("mystery") != std::string::npos);
    }
  }
  SUBCASE("not JSON at all") {
    std::istringstream in("m = 4\n");
    CHECK_THROWS_AS(load_scenario(in), DataError);
  }
}
