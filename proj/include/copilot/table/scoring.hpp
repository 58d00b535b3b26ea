#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copilot/gateway/gateway.hpp"
#include "copilot/table/attribution.hpp"

namespace copilot::table {

struct ExtractedExplanation {
  std::optional<Direction> direction;  // empty when missing or ambiguous
  std::vector<std::optional<FactorClass>> classes;  // per row factor, same order
};

/// Reads the direction keyword (decrease / increase / no change) from the
/// text before the first factor mention and, for each factor, the class
/// phrase ("contributing factor" / "mitigating factor" / "not a factor")
/// between that factor's first mention and the next factor mention.
/// Missing or conflicting phrases leave the slot empty.
ExtractedExplanation extract_explanation(const AttributionRow& row, const std::string& candidate);

struct RowVerdict {
  bool correct = false;
  std::string reason;  // empty when correct
};

/// Strict mode compares the trimmed candidate against the canonical text.
RowVerdict grade_explanation(const AttributionRow& row, const std::string& candidate,
                             bool strict = false);

struct ExplanationPair {
  AttributionRow row;
  std::string candidate;
};

struct TableScore {
  double accuracy = 0.0;  // 0 for an empty list
  std::size_t correct = 0;
  std::vector<RowVerdict> verdicts;
};

TableScore score_explanations(const std::vector<ExplanationPair>& pairs, bool strict = false);

/// Instructions with the worked example in `format`, then the target row.
std::string build_table_prompt(const AttributionRow& row, RowFormat format);

struct TableEvalOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 20240101;
  RowFormat format = RowFormat::Csv;
  bool strict = false;
  bool stratified = true;
  std::size_t workers = 4;
};

struct TableEvalItem {
  AttributionRow row;
  std::string output;
  RowVerdict verdict;
};

struct TableEvalResult {
  std::string endpoint;
  TableEvalOptions options;
  std::vector<TableEvalItem> items;
  TableScore score;
};

TableEvalResult run_table_eval(gateway::Gateway& gateway, const std::string& endpoint,
                               const TableEvalOptions& options = {});

}  // namespace copilot::table
