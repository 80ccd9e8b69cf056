#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prefpower {

enum class Outcome { kAWins, kBWins, kTie, kBothBad };

// How ties enter the margin estimate. kDrop conditions on decisive outcomes
// (the best-case reading), kHalf splits each tie, kPessimistic credits every
// tie to the canonical second model, pulling the estimate toward it.
enum class TiePolicy { kDrop, kHalf, kPessimistic };

const char* outcome_token(Outcome o);
const char* tie_policy_name(TiePolicy p);
std::optional<Outcome> parse_outcome(const std::string& token);
std::optional<TiePolicy> parse_tie_policy(const std::string& token);

struct JudgmentRecord {
  std::string model_a;
  std::string model_b;
  std::string prompt_id;    // may be empty
  std::string prompt_type;  // may be empty
  Outcome outcome = Outcome::kTie;
  std::optional<std::int64_t> timestamp;  // monotone sort key when present
};

// Unordered model pair under a canonical orientation: first is the
// lexicographically smaller name. All aggregates for the same two models
// share one key regardless of how the records were oriented.
struct PairKey {
  std::string first;
  std::string second;

  static PairKey of(const std::string& a, const std::string& b);
  auto operator<=>(const PairKey&) const = default;
  std::string label() const { return first + " vs " + second; }
};

struct PromptCounts {
  std::int64_t wins_first = 0;
  std::int64_t wins_second = 0;
  std::int64_t ties = 0;
};

struct PairAggregate {
  PairKey pair;
  std::int64_t wins_first = 0;
  std::int64_t wins_second = 0;
  std::int64_t ties = 0;  // includes BOTH_BAD
  std::map<std::string, PromptCounts> per_prompt;

  std::int64_t decisive() const { return wins_first + wins_second; }
  std::int64_t total() const { return decisive() + ties; }
};

struct MarginEstimate {
  PairKey pair;
  double p_hat = 0.5;      // P(second beats first) under the tie policy
  double delta_hat = 0.0;  // p_hat - 1/2
  std::int64_t n_decisive = 0;
  double n_effective = 0.0;
  TiePolicy tie_policy = TiePolicy::kDrop;
};

struct Dataset {
  std::vector<JudgmentRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

enum class InputFormat { kCsv, kJsonl };

struct RowError {
  std::size_t line = 0;  // 1-based, header included for CSV
  std::string message;
};

struct IngestResult {
  Dataset dataset;
  std::vector<RowError> row_errors;
};

// Parses the stream into records, preserving input order. Structural
// problems (missing or duplicate header, wrong column set) throw DataError;
// per-row problems are collected with their line numbers and the row is
// skipped.
IngestResult ingest(std::istream& in, InputFormat format);

// Writers emit the same schema ingest accepts.
void write_csv(std::ostream& out, const Dataset& ds);
void write_jsonl(std::ostream& out, const Dataset& ds);

// Canonical pair keys present in the dataset, sorted.
std::vector<PairKey> list_pairs(const Dataset& ds);

// Counts for one pair, oriented to the canonical key. Records mentioning the
// pair in either orientation contribute; BOTH_BAD counts as a tie.
PairAggregate aggregate(const Dataset& ds, const PairKey& pair);

// Margin estimate under the given tie policy. Throws InfeasibleError when
// the policy leaves no effective judgments (e.g. kDrop with zero decisive).
MarginEstimate estimate_margin(const PairAggregate& agg, TiePolicy policy);

// Pairs whose decisive count reaches min_decisive, sorted.
std::vector<PairKey> well_sampled_pairs(const Dataset& ds, std::int64_t min_decisive = 200);

// Keeps the earliest judgment per (pair, prompt); earliest means smallest
// timestamp when all records carry one, input order otherwise. Records with
// an empty prompt_id are kept as-is. Idempotent.
Dataset unique_prompt_restrict(const Dataset& ds);

// Decisive outcomes for one pair in evaluation order (1 = second model won).
// Ordering follows timestamps when every decisive record has one, else
// input order.
std::vector<std::uint8_t> decisive_outcomes(const Dataset& ds, const PairKey& pair);

}  // namespace prefpower
