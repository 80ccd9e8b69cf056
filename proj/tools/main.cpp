// prefpower — feasibility analysis for pairwise human preference evaluation.
//
// Subcommands: budget | margins | detect | simulate | replay | icc | plan |
// decompose. Randomized commands take --seed (or generate one and print it);
// identical seeds and inputs produce byte-identical outputs.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "prefpower/allocation.hpp"
#include "prefpower/dependence.hpp"
#include "prefpower/detectability.hpp"
#include "prefpower/errors.hpp"
#include "prefpower/judgments.hpp"
#include "prefpower/margin_stats.hpp"
#include "prefpower/planner.hpp"
#include "prefpower/scenario.hpp"
#include "prefpower/stats.hpp"

namespace {

using namespace prefpower;
using cli::RunManifest;
using cli::aligned_table;
using cli::fmt3;
using cli::fmt6;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // analysis-level negative verdicts
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct InputOptions {
  std::string path;
  std::string format;  // "", "csv", "jsonl"
  bool strict = false;
  bool unique_prompts = false;
};

InputFormat resolve_format(const InputOptions& in) {
  if (in.format == "csv") return InputFormat::kCsv;
  if (in.format == "jsonl") return InputFormat::kJsonl;
  if (in.path.size() >= 6 && in.path.substr(in.path.size() - 6) == ".jsonl")
    return InputFormat::kJsonl;
  return InputFormat::kCsv;
}

Dataset load_dataset(const InputOptions& in, RunManifest& manifest) {
  manifest.input(in.path);
  std::ifstream file(in.path);
  if (!file) throw DataError("cannot open '" + in.path + "'");
  auto result = ingest(file, resolve_format(in));
  for (const auto& err : result.row_errors)
    std::cerr << in.path << ":" << err.line << ": " << err.message << "\n";
  if (!result.row_errors.empty()) {
    std::cerr << result.row_errors.size() << " malformed row(s) skipped\n";
    if (in.strict) throw DataError("malformed rows present under --strict");
  }
  if (in.unique_prompts) result.dataset = unique_prompt_restrict(result.dataset);
  return result.dataset;
}

PairKey parse_pair(const std::string& arg) {
  const auto comma = arg.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= arg.size())
    throw UsageError("--pair expects 'model_a,model_b'");
  return PairKey::of(arg.substr(0, comma), arg.substr(comma + 1));
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t generated =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cerr << "seed: " << generated << " (generated; pass --seed to reproduce)\n";
  return generated;
}

void write_text_file(const std::string& path, const std::string& contents,
                     const RunManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << contents;
  manifest.write_for(path);
}

void emit(const std::string& text, const json& report, bool as_json) {
  if (as_json)
    std::cout << report.dump(2) << '\n';
  else
    std::cout << text;
}

// ---------------------------------------------------------------------------
// budget
// ---------------------------------------------------------------------------

struct BudgetArgs {
  double delta = 0.0;
  double alpha = 0.05;
  double power = 0.90;
  bool as_json = false;
};

int run_budget(const BudgetArgs& args) {
  const TestConfig cfg{args.alpha, args.power};
  std::int64_t n = 0;
  try {
    n = required_sample_size(args.delta, cfg);
  } catch (const InfeasibleError&) {
    std::cerr << "infeasible: a zero margin cannot be detected at any finite budget\n";
    return kExitNegative;
  }
  json report;
  report["delta"] = args.delta;
  report["alpha"] = args.alpha;
  report["power"] = args.power;
  report["required_n"] = n;
  report["constant"] = sample_size_constant(cfg);
  emit(std::to_string(n) + "\n", report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// margins
// ---------------------------------------------------------------------------

struct MarginsArgs {
  InputOptions input;
  std::string tie_policy = "drop";
  std::int64_t min_decisive = 200;
  double tau = 0.10;
  std::vector<double> levels = {0.10, 0.25, 0.50};
  double power = 0.90;
  std::string out;
  bool as_json = false;
};

int run_margins(const MarginsArgs& args) {
  RunManifest manifest("margins", kVersion);
  manifest.param("tie_policy", args.tie_policy);
  manifest.param("min_decisive", args.min_decisive);
  manifest.param("tau", args.tau);
  manifest.param("levels", args.levels);
  manifest.param("power", args.power);
  manifest.param("unique_prompts", args.input.unique_prompts);

  const auto ds = load_dataset(args.input, manifest);
  const auto policy = parse_tie_policy(args.tie_policy);
  if (!policy) throw UsageError("unknown tie policy '" + args.tie_policy + "'");

  const auto pairs = well_sampled_pairs(ds, args.min_decisive);
  if (pairs.empty()) {
    std::cerr << "no qualifying pairs (min decisive " << args.min_decisive << ")\n";
    return kExitNegative;
  }
  std::vector<MarginEstimate> margins;
  std::vector<PairAggregate> aggregates;
  for (const auto& pair : pairs) {
    aggregates.push_back(aggregate(ds, pair));
    margins.push_back(estimate_margin(aggregates.back(), *policy));
  }

  const TestConfig cfg{0.05, args.power};
  const auto quantiles = tail_quantiles(margins, args.levels, cfg);
  const auto near_tie = near_tie_filter(margins, args.tau, cfg);

  std::vector<std::vector<std::string>> qt = {{"level", "|delta|", "n(a=0.05)", "n(a=0.01)"}};
  for (const auto& row : quantiles.rows)
    qt.push_back({fmt3(row.level), fmt6(row.abs_margin), std::to_string(row.n_alpha05),
                  std::to_string(row.n_alpha01)});

  std::ostringstream text;
  text << "pairs analyzed: " << pairs.size() << " (tie policy " << args.tie_policy << ")\n\n"
       << aligned_table(qt) << "\nnear-tie subset (|delta| <= " << fmt3(args.tau) << "): "
       << near_tie.count << "/" << near_tie.analyzed << " pairs (proportion "
       << fmt6(near_tie.proportion) << ")\n";
  if (near_tie.median_abs_margin) {
    text << "median |delta| within subset: " << fmt6(*near_tie.median_abs_margin)
         << ", implied n(a=0.05): " << *near_tie.implied_n_alpha05 << "\n";
  }

  json report;
  report["manifest"] = manifest.json();
  report["pair_count"] = pairs.size();
  report["quantiles"] = json::array();
  for (const auto& row : quantiles.rows)
    report["quantiles"].push_back({{"level", row.level},
                                   {"abs_margin", row.abs_margin},
                                   {"n_alpha05", row.n_alpha05},
                                   {"n_alpha01", row.n_alpha01}});
  report["near_tie"] = {{"tau", near_tie.tau},
                        {"count", near_tie.count},
                        {"analyzed", near_tie.analyzed},
                        {"proportion", near_tie.proportion}};
  if (near_tie.median_abs_margin) {
    report["near_tie"]["median_abs_margin"] = *near_tie.median_abs_margin;
    report["near_tie"]["implied_n_alpha05"] = *near_tie.implied_n_alpha05;
  }

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << "pair,wins_first,wins_second,ties,n_decisive,n_effective,p_hat,delta_hat,abs_delta\n";
    for (std::size_t i = 0; i < margins.size(); ++i) {
      const auto& agg = aggregates[i];
      const auto& m = margins[i];
      csv << '"' << m.pair.label() << "\"," << agg.wins_first << ',' << agg.wins_second << ','
          << agg.ties << ',' << m.n_decisive << ',' << fmt6(m.n_effective) << ','
          << fmt6(m.p_hat) << ',' << fmt6(m.delta_hat) << ',' << fmt6(std::abs(m.delta_hat))
          << '\n';
    }
    write_text_file(args.out, csv.str(), manifest);
  }

  emit(text.str(), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
  InputOptions input;
  std::string pair;
  std::vector<std::int64_t> grid;
  double alpha = 0.05;
  std::size_t trials = 2000;
  std::optional<std::uint64_t> seed;
  bool without_replacement = false;
  bool normal_approx = false;
  std::string out;
  bool as_json = false;
};

int run_detect(const DetectArgs& args) {
  RunManifest manifest("detect", kVersion);
  const auto seed = resolve_seed(args.seed);
  manifest.seed(seed);
  manifest.param("pair", args.pair);
  manifest.param("grid", args.grid);
  manifest.param("alpha", args.alpha);
  manifest.param("trials", args.trials);
  manifest.param("without_replacement", args.without_replacement);
  manifest.param("normal_approx", args.normal_approx);

  const auto ds = load_dataset(args.input, manifest);
  const auto pair = parse_pair(args.pair);
  const auto agg = aggregate(ds, pair);

  CurveOptions options;
  options.alpha = args.alpha;
  options.trials = args.trials;
  options.with_replacement = !args.without_replacement;
  options.normal_approx = args.normal_approx;
  const auto curve = detectability_curve(agg, args.grid, options, seed);

  std::ostringstream csv;
  csv << "pair,n,power,trials,alpha,seed\n";
  for (std::size_t i = 0; i < curve.n_grid.size(); ++i) {
    csv << '"' << pair.label() << "\"," << curve.n_grid[i] << ',' << fmt6(curve.power[i]) << ','
        << curve.trials << ',' << fmt6(curve.alpha) << ',' << curve.seed << '\n';
  }
  if (!args.out.empty()) write_text_file(args.out, csv.str(), manifest);

  json report;
  report["manifest"] = manifest.json();
  report["pair"] = pair.label();
  report["decisive"] = agg.decisive();
  report["curve"] = json::array();
  for (std::size_t i = 0; i < curve.n_grid.size(); ++i)
    report["curve"].push_back({{"n", curve.n_grid[i]}, {"power", curve.power[i]}});

  emit(csv.str(), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool as_json = false;
};

int run_simulate(const SimulateArgs& args) {
  RunManifest manifest("simulate", kVersion);
  manifest.input(args.config);
  auto cfg = load_scenario_file(args.config);
  if (args.seed) cfg.seed = *args.seed;
  manifest.seed(cfg.seed);
  manifest.param("config", args.config);
  manifest.param("trials", cfg.trials);
  manifest.param("alpha", cfg.alpha);

  struct Row {
    std::int64_t budget;
    SimulationSummary summary;
  };
  std::vector<Row> rows;
  for (std::int64_t budget : cfg.budgets) {
    if (cfg.run_proportional) {
      rows.push_back({budget, simulate_power(cfg.model, AllocationPolicy::proportional(), budget,
                                             cfg.alpha, cfg.trials,
                                             derive_seed(cfg.seed, std::uint64_t{0},
                                                         static_cast<std::uint64_t>(budget)))});
    }
    if (cfg.run_two_stage) {
      rows.push_back({budget, simulate_power(cfg.model, cfg.two_stage_policy(), budget, cfg.alpha,
                                             cfg.trials,
                                             derive_seed(cfg.seed, std::uint64_t{1},
                                                         static_cast<std::uint64_t>(budget)))});
    }
  }

  std::ostringstream csv;
  csv << "B,policy,power,jaccard_mean,signal_mass_mean\n";
  for (const auto& row : rows) {
    csv << row.budget << ',' << policy_name(row.summary.policy) << ','
        << fmt6(row.summary.power) << ',';
    if (row.summary.jaccard_mean) csv << fmt6(*row.summary.jaccard_mean);
    csv << ',';
    if (row.summary.signal_mass_mean) csv << fmt6(*row.summary.signal_mass_mean);
    csv << '\n';
  }
  if (!args.out.empty()) write_text_file(args.out, csv.str(), manifest);

  json report;
  report["manifest"] = manifest.json();
  report["results"] = json::array();
  for (const auto& row : rows) {
    json r = {{"B", row.budget},
              {"policy", policy_name(row.summary.policy)},
              {"power", row.summary.power}};
    if (row.summary.jaccard_mean) r["jaccard_mean"] = *row.summary.jaccard_mean;
    if (row.summary.signal_mass_mean) r["signal_mass_mean"] = *row.summary.signal_mass_mean;
    if (row.summary.kappa_mean) r["kappa_mean"] = *row.summary.kappa_mean;
    report["results"].push_back(r);
  }

  emit(csv.str(), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

struct ReplayArgs {
  InputOptions input;
  std::string pair;
  std::string policy = "both";
  std::int64_t budget = 0;
  std::int64_t screening = 0;  // 0: default
  double retention = 0.2;
  double alpha = 0.05;
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
  bool strict_pool = false;
  std::string out;
  bool as_json = false;
};

int run_replay(const ReplayArgs& args) {
  RunManifest manifest("replay", kVersion);
  const auto seed = resolve_seed(args.seed);
  manifest.seed(seed);
  manifest.param("pair", args.pair);
  manifest.param("policy", args.policy);
  manifest.param("budget", args.budget);
  manifest.param("b", args.screening);
  manifest.param("q", args.retention);
  manifest.param("alpha", args.alpha);
  manifest.param("trials", args.trials);
  manifest.param("strict_pool", args.strict_pool);

  const auto ds = load_dataset(args.input, manifest);
  const auto pair = parse_pair(args.pair);
  const auto pool = build_replay_pool(ds, pair);
  if (pool.labels.empty()) {
    std::cerr << "no decisive judgments for " << pair.label() << "\n";
    return kExitNegative;
  }

  const std::int64_t b =
      args.screening > 0 ? args.screening : default_screening_budget(pool.labels.size());

  std::vector<AllocationPolicy> policies;
  if (args.policy == "proportional" || args.policy == "both")
    policies.push_back(AllocationPolicy::proportional());
  if (args.policy == "two_stage" || args.policy == "both")
    policies.push_back(AllocationPolicy::two_stage(b, args.retention));
  if (policies.empty())
    throw UsageError("--policy must be one of proportional|two_stage|both");

  ReplayOptions options;
  options.alpha = args.alpha;
  options.trials = args.trials;
  options.strict_pool = args.strict_pool;

  std::vector<SimulationSummary> summaries;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    options.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    summaries.push_back(offline_replay(pool, policies[i], args.budget, options));
  }

  std::vector<std::vector<std::string>> table = {
      {"policy", "budget", "power", "trials", "kappa_mean"}};
  std::ostringstream csv;
  csv << "policy,budget,power,trials,kappa_mean\n";
  for (const auto& s : summaries) {
    const std::string kappa = s.kappa_mean ? fmt6(*s.kappa_mean) : "";
    table.push_back({policy_name(s.policy), std::to_string(args.budget), fmt6(s.power),
                     std::to_string(s.trials), kappa.empty() ? "---" : kappa});
    csv << policy_name(s.policy) << ',' << args.budget << ',' << fmt6(s.power) << ','
        << s.trials << ',' << kappa << '\n';
  }
  if (!args.out.empty()) write_text_file(args.out, csv.str(), manifest);

  std::ostringstream text;
  text << "pool: " << pool.total() << " decisive judgments across " << pool.labels.size()
       << " prompt types\n\n"
       << aligned_table(table);

  json report;
  report["manifest"] = manifest.json();
  report["pool_total"] = pool.total();
  report["pool_types"] = pool.labels.size();
  report["results"] = json::array();
  for (const auto& s : summaries) {
    json r = {{"policy", policy_name(s.policy)}, {"power", s.power}, {"trials", s.trials}};
    if (s.kappa_mean) r["kappa_mean"] = *s.kappa_mean;
    report["results"].push_back(r);
  }

  emit(text.str(), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// icc
// ---------------------------------------------------------------------------

struct IccArgs {
  std::vector<std::int64_t> n0;
  std::vector<double> rho;
  std::string out;
  bool as_json = false;
};

int run_icc(const IccArgs& args) {
  RunManifest manifest("icc", kVersion);
  manifest.param("n0", args.n0);
  manifest.param("rho", args.rho);

  std::vector<std::vector<std::string>> table = {{"n0", "rho", "inflation", "n_inflated"}};
  std::ostringstream csv;
  csv << "n0,rho,inflation,n_inflated\n";
  json rows = json::array();
  for (std::int64_t n0 : args.n0) {
    for (double rho : args.rho) {
      const auto r = inflated_sample_size(n0, rho);
      const std::string n_out = r.feasible ? std::to_string(r.n_inflated) : ">10000";
      table.push_back({std::to_string(n0), fmt6(rho), r.feasible ? fmt3(r.inflation) : "---",
                       n_out});
      csv << n0 << ',' << fmt6(rho) << ',' << (r.feasible ? fmt6(r.inflation) : "---") << ','
          << n_out << '\n';
      json jr = {{"n0", n0}, {"rho", rho}, {"feasible", r.feasible}};
      if (r.feasible) {
        jr["inflation"] = r.inflation;
        jr["n_inflated"] = r.n_inflated;
      }
      rows.push_back(jr);
    }
  }
  if (!args.out.empty()) write_text_file(args.out, csv.str(), manifest);

  json report;
  report["manifest"] = manifest.json();
  report["rows"] = rows;
  emit(aligned_table(table), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

struct PlanArgs {
  InputOptions input;  // optional source of the pilot
  std::string pair;
  std::int64_t wins_first = -1;
  std::int64_t wins_second = -1;
  std::int64_t ties = 0;
  std::int64_t budget = 0;
  double alpha = 0.05;
  double power = 0.90;
  double low_signal = 0.05;
  // Optional allocation advice from screening diagnostics.
  std::optional<double> kappa;
  std::int64_t types = 0;
  std::int64_t screening = 0;
  bool as_json = false;
};

int run_plan(const PlanArgs& args) {
  RunManifest manifest("plan", kVersion);
  manifest.param("budget", args.budget);
  manifest.param("alpha", args.alpha);
  manifest.param("power", args.power);
  manifest.param("low_signal_threshold", args.low_signal);

  PairAggregate pilot;
  if (!args.input.path.empty()) {
    if (args.pair.empty()) throw UsageError("--pair is required with --input");
    const auto ds = load_dataset(args.input, manifest);
    pilot = aggregate(ds, parse_pair(args.pair));
  } else {
    if (args.wins_first < 0 || args.wins_second < 0)
      throw UsageError("provide either --input/--pair or --wins-first/--wins-second");
    pilot.pair = PairKey{"first", "second"};
    pilot.wins_first = args.wins_first;
    pilot.wins_second = args.wins_second;
    pilot.ties = args.ties;
  }

  FeasibilityReport report;
  try {
    report = pilot_assess(pilot, {args.alpha, args.power}, args.budget, args.low_signal);
  } catch (const InfeasibleError& e) {
    std::cerr << e.what() << "\n";
    return kExitNegative;
  }

  for (const auto& warning : report.warnings) std::cerr << "warning: " << warning << "\n";

  std::ostringstream text;
  text << "verdict: " << verdict_name(report.verdict) << "\n"
       << "p_hat: " << fmt6(report.p_hat) << "  delta_hat: " << fmt6(report.delta_hat)
       << "  pilot decisive: " << report.pilot_decisive << "\n"
       << "required n: ";
  if (report.required_n)
    text << *report.required_n;
  else
    text << "unbounded";
  text << "  available budget: " << report.available_budget << "\n"
       << report.narrative << "\n";

  json jr;
  jr["manifest"] = manifest.json();
  jr["verdict"] = verdict_name(report.verdict);
  jr["p_hat"] = report.p_hat;
  jr["delta_hat"] = report.delta_hat;
  jr["pilot_decisive"] = report.pilot_decisive;
  jr["available_budget"] = report.available_budget;
  jr["required_n"] = report.required_n ? json(*report.required_n) : json();
  jr["narrative"] = report.narrative;
  jr["warnings"] = report.warnings;

  if (args.kappa) {
    if (args.types < 1) throw UsageError("--types is required with --kappa");
    const std::int64_t b =
        args.screening > 0 ? args.screening
                           : default_screening_budget(static_cast<std::size_t>(args.types));
    const auto advice = allocation_advice(*args.kappa, args.budget, args.types, b);
    text << "allocation: " << policy_name(advice.choice) << " (" << advice.reason << ")\n";
    jr["allocation"] = {{"choice", policy_name(advice.choice)}, {"reason", advice.reason}};
  }

  emit(text.str(), jr, args.as_json);
  return report.verdict == Verdict::kFeasible ? kExitOk : kExitNegative;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeArgs {
  InputOptions input;
  std::string pair;
  std::string compare;  // optional second dataset
  bool as_json = false;
};

int run_decompose(const DecomposeArgs& args) {
  RunManifest manifest("decompose", kVersion);
  manifest.param("pair", args.pair);

  const auto ds = load_dataset(args.input, manifest);
  const auto pair = parse_pair(args.pair);
  const auto decomp = variance_decomposition(ds, pair);

  std::optional<ClusterRobustResult> robust;
  try {
    robust = cluster_robust_ratio(ds, pair);
  } catch (const std::exception&) {
    robust = std::nullopt;  // degenerate or single-cluster data
  }

  std::ostringstream text;
  text << "pair: " << pair.label() << "\n"
       << "between-prompt variance: " << fmt6(decomp.between_prompt) << "\n"
       << "within-prompt variance:  " << fmt6(decomp.within_prompt) << "\n"
       << "prompts: " << decomp.prompts << " (" << decomp.prompts_with_repeats
       << " with repeats)\n";
  if (robust)
    text << "cluster-robust / classical variance ratio: " << fmt6(robust->ratio) << "\n";

  json report;
  report["manifest"] = manifest.json();
  report["pair"] = pair.label();
  report["between_prompt"] = decomp.between_prompt;
  report["within_prompt"] = decomp.within_prompt;
  report["prompts"] = decomp.prompts;
  report["prompts_with_repeats"] = decomp.prompts_with_repeats;
  if (robust) report["cluster_robust_ratio"] = robust->ratio;

  if (!args.compare.empty()) {
    InputOptions other = args.input;
    other.path = args.compare;
    const auto ds2 = load_dataset(other, manifest);
    const auto decomp2 = variance_decomposition(ds2, pair);
    const double ratio = decomp2.between_prompt > 0.0
                             ? decomp.between_prompt / decomp2.between_prompt
                             : std::numeric_limits<double>::infinity();
    text << "comparison between-prompt variance: " << fmt6(decomp2.between_prompt) << "\n"
         << "between-prompt ratio (input/compare): " << fmt6(ratio) << "\n";
    report["compare_between_prompt"] = decomp2.between_prompt;
    report["compare_within_prompt"] = decomp2.within_prompt;
    report["between_ratio"] = ratio;
  }

  emit(text.str(), report, args.as_json);
  return kExitOk;
}

// ---------------------------------------------------------------------------

void add_input_options(CLI::App* cmd, InputOptions& input, bool required = true) {
  auto* opt = cmd->add_option("--input", input.path, "judgment log (CSV or JSONL)");
  if (required) opt->required();
  cmd->add_option("--format", input.format, "input format: csv|jsonl (default: by extension)")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_flag("--strict", input.strict, "fail on malformed rows instead of skipping");
  cmd->add_flag("--unique-prompts", input.unique_prompts,
                "keep only the first judgment per (pair, prompt)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feasibility analysis for pairwise human preference evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  BudgetArgs budget;
  auto* cmd_budget = app.add_subcommand("budget", "required decisive judgments for a margin");
  cmd_budget->add_option("--delta", budget.delta, "preference margin |p - 1/2|")->required();
  cmd_budget->add_option("--alpha", budget.alpha, "significance level");
  cmd_budget->add_option("--power", budget.power, "target power");
  cmd_budget->add_flag("--json", budget.as_json, "emit a JSON report");

  MarginsArgs margins;
  auto* cmd_margins = app.add_subcommand("margins", "margin quantiles and near-tie feasibility");
  add_input_options(cmd_margins, margins.input);
  cmd_margins->add_option("--tie-policy", margins.tie_policy, "drop|half|pessimistic")
      ->check(CLI::IsMember({"drop", "half", "pessimistic"}));
  cmd_margins->add_option("--min-decisive", margins.min_decisive,
                          "well-sampled threshold (decisive judgments)")
      ->check(CLI::PositiveNumber);
  cmd_margins->add_option("--tau", margins.tau, "near-tie threshold on |delta|");
  cmd_margins->add_option("--levels", margins.levels, "quantile levels")->delimiter(',');
  cmd_margins->add_option("--power", margins.power, "power for implied budgets");
  cmd_margins->add_option("--out", margins.out, "write per-pair margins CSV here");
  cmd_margins->add_flag("--json", margins.as_json, "emit a JSON report");

  DetectArgs detect;
  auto* cmd_detect = app.add_subcommand("detect", "Monte-Carlo detectability curve for a pair");
  add_input_options(cmd_detect, detect.input);
  cmd_detect->add_option("--pair", detect.pair, "model pair as 'model_a,model_b'")->required();
  cmd_detect->add_option("--grid", detect.grid, "budgets n to evaluate")
      ->required()
      ->delimiter(',');
  cmd_detect->add_option("--alpha", detect.alpha, "test level");
  cmd_detect->add_option("--trials", detect.trials, "resamples per grid point");
  cmd_detect->add_option("--seed", detect.seed, "RNG seed");
  cmd_detect->add_flag("--without-replacement", detect.without_replacement,
                       "subsample without replacement");
  cmd_detect->add_flag("--normal-approx", detect.normal_approx,
                       "z-test instead of the exact binomial test");
  cmd_detect->add_option("--out", detect.out, "write the curve CSV here");
  cmd_detect->add_flag("--json", detect.as_json, "emit a JSON report");

  SimulateArgs simulate;
  auto* cmd_simulate =
      app.add_subcommand("simulate", "allocation-policy power sweep on a synthetic scenario");
  cmd_simulate->add_option("--config", simulate.config, "scenario config (JSON)")->required();
  cmd_simulate->add_option("--seed", simulate.seed, "override the scenario seed");
  cmd_simulate->add_option("--out", simulate.out, "write the results CSV here");
  cmd_simulate->add_flag("--json", simulate.as_json, "emit a JSON report");

  ReplayArgs replay;
  auto* cmd_replay =
      app.add_subcommand("replay", "offline policy replay against a fixed judgment pool");
  add_input_options(cmd_replay, replay.input);
  cmd_replay->add_option("--pair", replay.pair, "model pair as 'model_a,model_b'")->required();
  cmd_replay->add_option("--policy", replay.policy, "proportional|two_stage|both")
      ->check(CLI::IsMember({"proportional", "two_stage", "both"}));
  cmd_replay->add_option("--budget", replay.budget, "total judgments per trial")->required();
  cmd_replay->add_option("-b,--screening", replay.screening,
                         "stage-1 judgments per type (default ceil(10 ln m))");
  cmd_replay->add_option("-q,--retention", replay.retention, "retained fraction of types");
  cmd_replay->add_option("--alpha", replay.alpha, "test level");
  cmd_replay->add_option("--trials", replay.trials, "replay trials");
  cmd_replay->add_option("--seed", replay.seed, "RNG seed");
  cmd_replay->add_flag("--strict-pool", replay.strict_pool,
                       "fail when a type pool cannot cover its assignment");
  cmd_replay->add_option("--out", replay.out, "write the comparison CSV here");
  cmd_replay->add_flag("--json", replay.as_json, "emit a JSON report");

  IccArgs icc;
  auto* cmd_icc = app.add_subcommand("icc", "sample-size inflation under intra-cluster correlation");
  cmd_icc->add_option("--n0", icc.n0, "effective sample sizes")->required()->delimiter(',');
  cmd_icc->add_option("--rho", icc.rho, "intra-cluster correlations")->required()->delimiter(',');
  cmd_icc->add_option("--out", icc.out, "write the sensitivity CSV here");
  cmd_icc->add_flag("--json", icc.as_json, "emit a JSON report");

  PlanArgs plan;
  auto* cmd_plan = app.add_subcommand("plan", "pilot feasibility verdict");
  add_input_options(cmd_plan, plan.input, /*required=*/false);
  cmd_plan->add_option("--pair", plan.pair, "model pair as 'model_a,model_b'");
  cmd_plan->add_option("--wins-first", plan.wins_first, "pilot wins of the canonical first model");
  cmd_plan->add_option("--wins-second", plan.wins_second,
                       "pilot wins of the canonical second model");
  cmd_plan->add_option("--ties", plan.ties, "pilot ties");
  cmd_plan->add_option("--budget", plan.budget, "available decisive-judgment budget")->required();
  cmd_plan->add_option("--alpha", plan.alpha, "significance level");
  cmd_plan->add_option("--power", plan.power, "target power");
  cmd_plan->add_option("--low-signal-threshold", plan.low_signal,
                       "|delta| at or below this advises a protocol switch");
  cmd_plan->add_option("--kappa", plan.kappa,
                       "top-q concentration statistic; adds allocation advice");
  cmd_plan->add_option("--types", plan.types, "prompt-type count m (with --kappa)");
  cmd_plan->add_option("--screening", plan.screening,
                       "stage-1 judgments per type (default ceil(10 ln m))");
  cmd_plan->add_flag("--json", plan.as_json, "emit a JSON report");

  DecomposeArgs decompose;
  auto* cmd_decompose =
      app.add_subcommand("decompose", "between/within prompt variance for a pair");
  add_input_options(cmd_decompose, decompose.input);
  cmd_decompose->add_option("--pair", decompose.pair, "model pair as 'model_a,model_b'")
      ->required();
  cmd_decompose->add_option("--compare", decompose.compare,
                            "second dataset for a protocol comparison");
  cmd_decompose->add_flag("--json", decompose.as_json, "emit a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help/--version exit with 0 through CLI11; real parse errors are
    // usage errors.
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_budget) return run_budget(budget);
    if (*cmd_margins) return run_margins(margins);
    if (*cmd_detect) return run_detect(detect);
    if (*cmd_simulate) return run_simulate(simulate);
    if (*cmd_replay) return run_replay(replay);
    if (*cmd_icc) return run_icc(icc);
    if (*cmd_plan) return run_plan(plan);
    if (*cmd_decompose) return run_decompose(decompose);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitNegative;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
