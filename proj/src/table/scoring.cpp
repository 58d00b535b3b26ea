#include "copilot/table/scoring.hpp"

#include <array>

#include "copilot/common/parallel.hpp"
#include "copilot/common/text.hpp"
#include "copilot/table/synthetic.hpp"

namespace copilot::table {

namespace {

constexpr std::size_t npos = std::string::npos;

struct Phrase {
  const char* text;
  FactorClass cls;
};

constexpr std::array<Phrase, 3> kClassPhrases = {{
    {"contributing factor", FactorClass::Contributor},
    {"mitigating factor", FactorClass::Mitigator},
    {"not a factor", FactorClass::NonInfluential},
}};

struct Keyword {
  const char* text;
  Direction dir;
};

constexpr std::array<Keyword, 3> kDirectionWords = {{
    {"decrease", Direction::Decrease},
    {"increase", Direction::Increase},
    {"no change", Direction::NoChange},
}};

}  // namespace

ExtractedExplanation extract_explanation(const AttributionRow& row, const std::string& candidate) {
  const std::string lower = text::to_lower(candidate);
  std::vector<std::string> names;
  std::vector<std::size_t> first;
  for (const auto& [name, _] : row.factor_scores) {
    names.push_back(text::to_lower(name));
    first.push_back(lower.find(names.back()));
  }

  ExtractedExplanation out;
  std::size_t head_end = lower.size();
  for (auto p : first) head_end = std::min(head_end, p);
  const std::string_view head = std::string_view(lower).substr(0, head_end);
  for (const auto& kw : kDirectionWords) {
    if (head.find(kw.text) == npos) continue;
    if (out.direction && *out.direction != kw.dir) {
      out.direction.reset();
      break;
    }
    out.direction = kw.dir;
  }

  for (std::size_t i = 0; i < names.size(); ++i) {
    std::optional<FactorClass> cls;
    if (first[i] != npos) {
      const std::size_t from = first[i] + names[i].size();
      std::size_t to = lower.size();
      for (std::size_t j = 0; j < names.size(); ++j) {
        if (j == i) continue;
        to = std::min(to, lower.find(names[j], from));
      }
      const std::string_view region = std::string_view(lower).substr(from, to - from);
      bool conflict = false;
      for (const auto& ph : kClassPhrases) {
        if (region.find(ph.text) == npos) continue;
        if (cls && *cls != ph.cls) conflict = true;
        cls = ph.cls;
      }
      if (conflict) cls.reset();
    }
    out.classes.push_back(cls);
  }
  return out;
}

RowVerdict grade_explanation(const AttributionRow& row, const std::string& candidate, bool strict) {
  RowVerdict v;
  if (strict) {
    v.correct = text::trim(candidate) == ground_truth_explanation(row).full_text;
    if (!v.correct) v.reason = "text differs from the canonical explanation";
    return v;
  }
  const auto got = extract_explanation(row, candidate);
  const Direction want = direction_of(row.absolute_change);
  if (!got.direction) {
    v.reason = "direction missing or ambiguous";
    return v;
  }
  if (*got.direction != want) {
    v.reason = "direction is " + direction_phrase(*got.direction) + ", expected " +
               direction_phrase(want);
    return v;
  }
  for (std::size_t i = 0; i < row.factor_scores.size(); ++i) {
    const auto& [name, score] = row.factor_scores[i];
    const FactorClass expected = classify_factor(score);
    if (!got.classes[i]) {
      v.reason = name + ": classification missing or ambiguous";
      return v;
    }
    if (*got.classes[i] != expected) {
      v.reason = name + ": " + to_string(*got.classes[i]) + ", expected " + to_string(expected);
      return v;
    }
  }
  v.correct = true;
  return v;
}

TableScore score_explanations(const std::vector<ExplanationPair>& pairs, bool strict) {
  TableScore out;
  out.verdicts.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.verdicts.push_back(grade_explanation(p.row, p.candidate, strict));
    if (out.verdicts.back().correct) ++out.correct;
  }
  if (!pairs.empty()) {
    out.accuracy = static_cast<double>(out.correct) / static_cast<double>(pairs.size());
  }
  return out;
}

std::string build_table_prompt(const AttributionRow& row, RowFormat format) {
  const AttributionRow example = example_row();
  std::string p =
      "You explain rows of an attribution report. A factor with a score above 5 is a "
      "contributing factor, a score below -5 makes it a mitigating factor, and any other score "
      "means it is not a factor. A negative absolute change indicates a decrease in the touch "
      "point's credit, a positive one an increase, and zero no change.\n\n";
  p += "Example row (" + to_string(format) + "):\n" + render_row(example, format) + "\n";
  p += "Explanation: " + ground_truth_explanation(example).full_text + "\n\n";
  p += "Row (" + to_string(format) + "):\n" + render_row(row, format) + "\n";
  p += "Explanation:";
  return p;
}

TableEvalResult run_table_eval(gateway::Gateway& gateway, const std::string& endpoint,
                               const TableEvalOptions& options) {
  TableEvalResult result;
  result.endpoint = endpoint;
  result.options = options;
  const auto rows = generate_synthetic_rows(options.n, options.seed, options.stratified);
  result.items.resize(rows.size());
  parallel_for(rows.size(), options.workers, [&](std::size_t i) {
    TableEvalItem item;
    item.row = rows[i];
    item.output = gateway.complete(endpoint, build_table_prompt(rows[i], options.format));
    item.verdict = grade_explanation(rows[i], item.output, options.strict);
    result.items[i] = std::move(item);
  });
  for (const auto& item : result.items) {
    result.score.verdicts.push_back(item.verdict);
    if (item.verdict.correct) ++result.score.correct;
  }
  if (!result.items.empty()) {
    result.score.accuracy =
        static_cast<double>(result.score.correct) / static_cast<double>(result.items.size());
  }
  return result;
}

}  // namespace copilot::table
