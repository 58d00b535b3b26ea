#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "copilot/gateway/gateway.hpp"
#include "copilot/sql/dataset.hpp"

namespace copilot::sql {

enum class VerdictKind { AstMatch, AstMismatch, StringFallbackMatch, StringFallbackMismatch };

std::string to_string(VerdictKind kind);  // "AST_MATCH", ...

struct MatchVerdict {
  VerdictKind kind = VerdictKind::AstMismatch;
  std::string detail;

  bool matched() const {
    return kind == VerdictKind::AstMatch || kind == VerdictKind::StringFallbackMatch;
  }
};

/// Parses and normalizes both sides and compares ASTs. If either side does
/// not parse, falls back to comparing lowercased, whitespace-collapsed text
/// with any trailing semicolon removed.
MatchVerdict match_sql(const std::string& prediction, const std::string& reference,
                       bool lenient = false);

/// Whitespace/case/semicolon folding used by the string fallback.
std::string fold_sql_text(const std::string& sql);

struct PredictionPair {
  std::string prediction;
  std::string reference;
};

struct ScoreResult {
  double accuracy = 0.0;  // 0 for an empty pair list
  std::size_t matches = 0;
  std::vector<MatchVerdict> verdicts;  // input order
};

ScoreResult score_predictions(const std::vector<PredictionPair>& pairs, bool lenient = false);

struct SqlEvalOptions {
  std::size_t n_shots = kDefaultShots;
  std::size_t eval_count = kDefaultEvalCount;
  std::uint64_t seed = kDefaultSplitSeed;
  bool lenient = false;
  std::size_t workers = 4;
};

struct SqlEvalItem {
  std::string question;
  std::string reference;
  std::string raw_output;
  std::string prediction;
  MatchVerdict strict;
  MatchVerdict lenient;
};

struct SqlEvalResult {
  std::string endpoint;
  SqlEvalOptions options;
  std::vector<std::string> shot_questions;  // the fixed shot set, logged
  std::vector<SqlEvalItem> items;
  ScoreResult strict;
  ScoreResult lenient;
  std::map<std::string, std::size_t> histogram;  // verdict kind -> count, for the selected mode

  const ScoreResult& selected() const { return options.lenient ? lenient : strict; }
};

/// Splits the dataset, prompts `endpoint` once per eval example with a fixed
/// shot set (the first n_shots of the train split) and scores the replies in
/// both modes. Gateway failures propagate.
SqlEvalResult run_sql_eval(const std::vector<SqlExample>& examples, gateway::Gateway& gateway,
                           const std::string& endpoint, const SqlEvalOptions& options = {});

}  // namespace copilot::sql
