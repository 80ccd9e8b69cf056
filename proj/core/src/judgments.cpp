#include "prefpower/judgments.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "prefpower/errors.hpp"

namespace prefpower {

namespace {

constexpr const char* kCsvHeader = "model_a,model_b,prompt_id,prompt_type,outcome,timestamp";

// Minimal RFC-4180 row split: handles quoted fields and doubled quotes.
std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::optional<std::int64_t> parse_timestamp(const std::string& raw, std::string* error) {
  if (raw.empty()) return std::nullopt;
  std::size_t pos = 0;
  try {
    const std::int64_t v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    *error = "timestamp is not an integer: '" + raw + "'";
    return std::nullopt;
  }
}

std::optional<JudgmentRecord> record_from_fields(const std::vector<std::string>& f,
                                                 std::string* error) {
  if (f.size() != 6) {
    *error = "expected 6 fields, got " + std::to_string(f.size());
    return std::nullopt;
  }
  JudgmentRecord rec;
  rec.model_a = f[0];
  rec.model_b = f[1];
  rec.prompt_id = f[2];
  rec.prompt_type = f[3];
  if (rec.model_a.empty() || rec.model_b.empty()) {
    *error = "model names must be nonempty";
    return std::nullopt;
  }
  if (rec.model_a == rec.model_b) {
    *error = "model_a and model_b must differ";
    return std::nullopt;
  }
  const auto outcome = parse_outcome(f[4]);
  if (!outcome) {
    *error = "unknown outcome token: '" + f[4] + "'";
    return std::nullopt;
  }
  rec.outcome = *outcome;
  rec.timestamp = parse_timestamp(f[5], error);
  if (!error->empty()) return std::nullopt;
  return rec;
}

IngestResult ingest_csv(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == kCsvHeader) {
      if (saw_header) throw DataError("duplicate header at line " + std::to_string(line_no));
      saw_header = true;
      continue;
    }
    if (!saw_header)
      throw DataError("missing header; expected '" + std::string(kCsvHeader) + "'");
    std::string error;
    auto rec = record_from_fields(split_csv_row(line), &error);
    if (rec)
      result.dataset.records.push_back(std::move(*rec));
    else
      result.row_errors.push_back({line_no, error});
  }
  if (!saw_header && line_no == 0) throw DataError("empty input: missing header");
  if (!saw_header) throw DataError("missing header; expected '" + std::string(kCsvHeader) + "'");
  return result;
}

IngestResult ingest_jsonl(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      result.row_errors.push_back({line_no, "not a JSON object"});
      continue;
    }
    std::vector<std::string> fields(6);
    std::string error;
    auto get_string = [&](const char* key, bool required) -> std::string {
      if (!j.contains(key) || j[key].is_null()) {
        if (required) error = std::string("missing field '") + key + "'";
        return "";
      }
      if (!j[key].is_string()) {
        error = std::string("field '") + key + "' must be a string";
        return "";
      }
      return j[key].get<std::string>();
    };
    fields[0] = get_string("model_a", true);
    fields[1] = get_string("model_b", true);
    fields[2] = get_string("prompt_id", false);
    fields[3] = get_string("prompt_type", false);
    fields[4] = get_string("outcome", true);
    if (j.contains("timestamp") && !j["timestamp"].is_null()) {
      if (j["timestamp"].is_number_integer())
        fields[5] = std::to_string(j["timestamp"].get<std::int64_t>());
      else
        error = "field 'timestamp' must be an integer";
    }
    if (!error.empty()) {
      result.row_errors.push_back({line_no, error});
      continue;
    }
    auto rec = record_from_fields(fields, &error);
    if (rec)
      result.dataset.records.push_back(std::move(*rec));
    else
      result.row_errors.push_back({line_no, error});
  }
  return result;
}

bool all_have_timestamps(const std::vector<const JudgmentRecord*>& recs) {
  return std::all_of(recs.begin(), recs.end(),
                     [](const JudgmentRecord* r) { return r->timestamp.has_value(); });
}

}  // namespace

const char* outcome_token(Outcome o) {
  switch (o) {
    case Outcome::kAWins: return "A_WINS";
    case Outcome::kBWins: return "B_WINS";
    case Outcome::kTie: return "TIE";
    case Outcome::kBothBad: return "BOTH_BAD";
  }
  return "?";
}

const char* tie_policy_name(TiePolicy p) {
  switch (p) {
    case TiePolicy::kDrop: return "drop";
    case TiePolicy::kHalf: return "half";
    case TiePolicy::kPessimistic: return "pessimistic";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(const std::string& token) {
  if (token == "A_WINS") return Outcome::kAWins;
  if (token == "B_WINS") return Outcome::kBWins;
  if (token == "TIE") return Outcome::kTie;
  if (token == "BOTH_BAD") return Outcome::kBothBad;
  return std::nullopt;
}

std::optional<TiePolicy> parse_tie_policy(const std::string& token) {
  if (token == "drop") return TiePolicy::kDrop;
  if (token == "half") return TiePolicy::kHalf;
  if (token == "pessimistic") return TiePolicy::kPessimistic;
  return std::nullopt;
}

PairKey PairKey::of(const std::string& a, const std::string& b) {
  if (a == b) throw UsageError("PairKey: models must differ");
  return a < b ? PairKey{a, b} : PairKey{b, a};
}

IngestResult ingest(std::istream& in, InputFormat format) {
  return format == InputFormat::kCsv ? ingest_csv(in) : ingest_jsonl(in);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  out << kCsvHeader << '\n';
  for (const auto& r : ds.records) {
    out << csv_escape(r.model_a) << ',' << csv_escape(r.model_b) << ','
        << csv_escape(r.prompt_id) << ',' << csv_escape(r.prompt_type) << ','
        << outcome_token(r.outcome) << ',';
    if (r.timestamp) out << *r.timestamp;
    out << '\n';
  }
}

void write_jsonl(std::ostream& out, const Dataset& ds) {
  for (const auto& r : ds.records) {
    nlohmann::json j;
    j["model_a"] = r.model_a;
    j["model_b"] = r.model_b;
    j["prompt_id"] = r.prompt_id.empty() ? nlohmann::json() : nlohmann::json(r.prompt_id);
    j["prompt_type"] = r.prompt_type.empty() ? nlohmann::json() : nlohmann::json(r.prompt_type);
    j["outcome"] = outcome_token(r.outcome);
    j["timestamp"] = r.timestamp ? nlohmann::json(*r.timestamp) : nlohmann::json();
    out << j.dump() << '\n';
  }
}

std::vector<PairKey> list_pairs(const Dataset& ds) {
  std::set<PairKey> keys;
  for (const auto& r : ds.records) keys.insert(PairKey::of(r.model_a, r.model_b));
  return {keys.begin(), keys.end()};
}

PairAggregate aggregate(const Dataset& ds, const PairKey& pair) {
  PairAggregate agg;
  agg.pair = pair;
  for (const auto& r : ds.records) {
    const bool forward = r.model_a == pair.first && r.model_b == pair.second;
    const bool reversed = r.model_a == pair.second && r.model_b == pair.first;
    if (!forward && !reversed) continue;
    auto& pc = agg.per_prompt[r.prompt_id];
    switch (r.outcome) {
      case Outcome::kAWins:
        (forward ? agg.wins_first : agg.wins_second)++;
        (forward ? pc.wins_first : pc.wins_second)++;
        break;
      case Outcome::kBWins:
        (forward ? agg.wins_second : agg.wins_first)++;
        (forward ? pc.wins_second : pc.wins_first)++;
        break;
      case Outcome::kTie:
      case Outcome::kBothBad:
        agg.ties++;
        pc.ties++;
        break;
    }
  }
  return agg;
}

MarginEstimate estimate_margin(const PairAggregate& agg, TiePolicy policy) {
  const double w1 = static_cast<double>(agg.wins_first);
  const double w2 = static_cast<double>(agg.wins_second);
  const double t = static_cast<double>(agg.ties);

  MarginEstimate m;
  m.pair = agg.pair;
  m.tie_policy = policy;
  m.n_decisive = agg.decisive();

  switch (policy) {
    case TiePolicy::kDrop:
      if (agg.decisive() < 1)
        throw InfeasibleError("estimate_margin: no decisive judgments for " + agg.pair.label());
      m.n_effective = w1 + w2;
      m.p_hat = w2 / m.n_effective;
      break;
    case TiePolicy::kHalf:
      if (agg.total() < 1)
        throw InfeasibleError("estimate_margin: no judgments for " + agg.pair.label());
      m.n_effective = w1 + w2 + t;
      m.p_hat = (w2 + t / 2.0) / m.n_effective;
      break;
    case TiePolicy::kPessimistic:
      if (agg.total() < 1)
        throw InfeasibleError("estimate_margin: no judgments for " + agg.pair.label());
      m.n_effective = w1 + w2 + t;
      m.p_hat = (w2 + t) / m.n_effective;
      break;
  }
  m.delta_hat = m.p_hat - 0.5;
  return m;
}

std::vector<PairKey> well_sampled_pairs(const Dataset& ds, std::int64_t min_decisive) {
  std::vector<PairKey> out;
  for (const auto& pair : list_pairs(ds)) {
    if (aggregate(ds, pair).decisive() >= min_decisive) out.push_back(pair);
  }
  return out;
}

Dataset unique_prompt_restrict(const Dataset& ds) {
  // Evaluation order: timestamps when every record has one, else input
  // order. Stable sort preserves input order among equal timestamps.
  std::vector<std::size_t> order(ds.records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const bool use_ts = !ds.records.empty() &&
                      std::all_of(ds.records.begin(), ds.records.end(),
                                  [](const JudgmentRecord& r) { return r.timestamp.has_value(); });
  if (use_ts) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *ds.records[a].timestamp < *ds.records[b].timestamp;
    });
  }

  std::set<std::pair<PairKey, std::string>> seen;
  std::vector<bool> keep(ds.records.size(), false);
  for (std::size_t idx : order) {
    const auto& r = ds.records[idx];
    if (r.prompt_id.empty()) {
      keep[idx] = true;  // identity unknown; nothing to deduplicate against
      continue;
    }
    const auto key = std::make_pair(PairKey::of(r.model_a, r.model_b), r.prompt_id);
    if (seen.insert(key).second) keep[idx] = true;
  }

  Dataset out;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    if (keep[i]) out.records.push_back(ds.records[i]);
  return out;
}

std::vector<std::uint8_t> decisive_outcomes(const Dataset& ds, const PairKey& pair) {
  std::vector<const JudgmentRecord*> recs;
  std::vector<std::uint8_t> vals;
  for (const auto& r : ds.records) {
    const bool forward = r.model_a == pair.first && r.model_b == pair.second;
    const bool reversed = r.model_a == pair.second && r.model_b == pair.first;
    if (!forward && !reversed) continue;
    if (r.outcome == Outcome::kTie || r.outcome == Outcome::kBothBad) continue;
    const bool second_won = forward ? r.outcome == Outcome::kBWins : r.outcome == Outcome::kAWins;
    recs.push_back(&r);
    vals.push_back(second_won ? 1 : 0);
  }
  if (!recs.empty() && all_have_timestamps(recs)) {
    std::vector<std::size_t> order(recs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return *recs[a]->timestamp < *recs[b]->timestamp;
    });
    std::vector<std::uint8_t> sorted(vals.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = vals[order[i]];
    return sorted;
  }
  return vals;
}

}  // namespace prefpower
