#include "copilot/sql/scoring.hpp"

#include <optional>

#include "copilot/common/parallel.hpp"
#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::AstMatch: return "AST_MATCH";
    case VerdictKind::AstMismatch: return "AST_MISMATCH";
    case VerdictKind::StringFallbackMatch: return "STRING_FALLBACK_MATCH";
    case VerdictKind::StringFallbackMismatch: return "STRING_FALLBACK_MISMATCH";
  }
  return "AST_MISMATCH";
}

std::string fold_sql_text(const std::string& sql) {
  std::string folded = text::collapse_whitespace(text::to_lower(sql));
  while (!folded.empty() && (folded.back() == ';' || folded.back() == ' ')) folded.pop_back();
  return folded;
}

MatchVerdict match_sql(const std::string& prediction, const std::string& reference, bool lenient) {
  std::optional<SqlAst> pred;
  std::optional<SqlAst> ref;
  std::string pred_error;
  std::string ref_error;
  try {
    pred = normalize_ast(parse_sql(prediction), lenient);
  } catch (const ParseError& e) {
    pred_error = e.what();
  }
  try {
    ref = normalize_ast(parse_sql(reference), lenient);
  } catch (const ParseError& e) {
    ref_error = e.what();
  }

  MatchVerdict v;
  if (pred && ref) {
    if (*pred == *ref) {
      v.kind = VerdictKind::AstMatch;
      v.detail = "normalized ASTs equal";
    } else {
      v.kind = VerdictKind::AstMismatch;
      v.detail = "expected: " + render_sql(*ref) + "\nactual:   " + render_sql(*pred);
    }
    return v;
  }
  const bool same = fold_sql_text(prediction) == fold_sql_text(reference);
  v.kind = same ? VerdictKind::StringFallbackMatch : VerdictKind::StringFallbackMismatch;
  if (!pred) v.detail += "prediction unparseable: " + pred_error;
  if (!ref) {
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += "reference unparseable: " + ref_error;
  }
  return v;
}

ScoreResult score_predictions(const std::vector<PredictionPair>& pairs, bool lenient) {
  ScoreResult out;
  out.verdicts.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.verdicts.push_back(match_sql(p.prediction, p.reference, lenient));
    if (out.verdicts.back().matched()) ++out.matches;
  }
  out.accuracy = pairs.empty() ? 0.0
                               : static_cast<double>(out.matches) / static_cast<double>(pairs.size());
  return out;
}

SqlEvalResult run_sql_eval(const std::vector<SqlExample>& examples, gateway::Gateway& gateway,
                           const std::string& endpoint, const SqlEvalOptions& options) {
  SqlEvalResult result;
  result.endpoint = endpoint;
  result.options = options;

  const DatasetSplit split = split_dataset(examples, options.eval_count, options.seed);
  std::vector<SqlExample> shots(
      split.train.begin(),
      split.train.begin() + static_cast<std::ptrdiff_t>(std::min(options.n_shots, split.train.size())));
  for (const auto& s : shots) result.shot_questions.push_back(s.question);

  result.items.resize(split.eval.size());
  parallel_for(split.eval.size(), options.workers, [&](std::size_t i) {
    const SqlExample& target = split.eval[i];
    const std::string prompt = build_fewshot_prompt(target, shots, options.n_shots, &split);
    SqlEvalItem item;
    item.question = target.question;
    item.reference = target.answer;
    item.raw_output = gateway.complete(endpoint, prompt);
    item.prediction = extract_sql(item.raw_output);
    item.strict = match_sql(item.prediction, item.reference, false);
    item.lenient = match_sql(item.prediction, item.reference, true);
    result.items[i] = std::move(item);
  });

  for (const auto& item : result.items) {
    result.strict.verdicts.push_back(item.strict);
    result.lenient.verdicts.push_back(item.lenient);
    if (item.strict.matched()) ++result.strict.matches;
    if (item.lenient.matched()) ++result.lenient.matches;
  }
  const double n = static_cast<double>(result.items.size());
  if (!result.items.empty()) {
    result.strict.accuracy = static_cast<double>(result.strict.matches) / n;
    result.lenient.accuracy = static_cast<double>(result.lenient.matches) / n;
  }
  for (const auto& v : result.selected().verdicts) ++result.histogram[to_string(v.kind)];
  return result;
}

}  // namespace copilot::sql
