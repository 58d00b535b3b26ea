#pragma once

#include <array>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "copilot/common/error.hpp"
#include "copilot/gateway/gateway.hpp"

namespace copilot::judge {

enum class Criterion { Accuracy, Relevance, Thoroughness, Clarity, Conciseness };

inline constexpr std::array<Criterion, 5> kCriteria = {
    Criterion::Accuracy, Criterion::Relevance, Criterion::Thoroughness, Criterion::Clarity,
    Criterion::Conciseness};

std::string to_string(Criterion c);  // "ACCURACY", ...
std::string display_name(Criterion c);  // "accuracy", ...

struct RubricSet {
  std::string version;
  std::map<Criterion, std::string> rubrics;
};

/// Built-in rubric sentences.
const RubricSet& default_rubrics();

/// JSON file {"version": "...", "rubrics": {"accuracy": "...", ...}} with
/// all five criteria. ConfigError otherwise.
RubricSet load_rubrics(const std::string& path);

/// Judge reply that does not follow the five-line format. `missing()` lists
/// criteria that never appeared (empty for other format faults).
class ParseError : public Error {
 public:
  ParseError(std::set<Criterion> missing, const std::string& what)
      : Error("ParseError", what), missing_(std::move(missing)) {}
  const std::set<Criterion>& missing() const { return missing_; }

 private:
  std::set<Criterion> missing_;
};

struct JudgeScore {
  std::map<Criterion, int> scores;
  std::string judge_endpoint;
  std::string question_id;
  std::string candidate;
};

/// Rubrics, question, reference and candidate, then the required reply
/// format. Each criterion name appears once. ConfigError on empty input.
std::string build_judge_prompt(const std::string& question, const std::string& reference,
                               const std::string& candidate,
                               const RubricSet& rubrics = default_rubrics());

/// Lines of the form "<criterion>: <integer>", names case-insensitive.
/// Lines that do not start with a criterion name are ignored. Throws
/// RangeError for a score outside 1..5 and ParseError for a non-integer
/// score, a duplicate or a missing criterion.
JudgeScore parse_judge_response(const std::string& text);

struct JudgeQuestion {
  std::string id;
  std::string question;
  std::string reference;
};

/// Line-delimited {id, question, reference} records.
std::vector<JudgeQuestion> load_judge_questions(const std::string& path);

/// Produces a candidate's answer to a question (normally via the QA agent).
using AnswerFn = std::function<std::string(const std::string& candidate, const JudgeQuestion&)>;

struct Exclusion {
  std::string candidate;
  std::string question_id;
  std::string reason;
};

struct CandidateSummary {
  std::string candidate;
  std::size_t included = 0;
  std::size_t excluded = 0;
  std::map<Criterion, double> means;  // rounded to 2 decimals; empty if nothing included
};

struct EvaluationReport {
  std::string judge_endpoint;
  std::string rubric_version;
  std::string transcript_ref;
  std::vector<CandidateSummary> candidates;  // input order
  std::vector<JudgeScore> scores;            // included pairs, candidate-major order
  std::vector<Exclusion> exclusions;
};

struct JudgeOptions {
  std::size_t workers = 4;
  const RubricSet* rubrics = nullptr;  // default_rubrics() when null
};

/// Scores every candidate x question cell with the judge. A reply that
/// fails to parse is retried once with a format reminder; a second failure,
/// or a failure to produce the candidate answer, excludes the cell. Means
/// pool the raw scores of included cells. EvalError if no cell survives.
EvaluationReport run_judged_eval(const std::vector<JudgeQuestion>& questions,
                                 const std::vector<std::string>& candidates,
                                 const std::string& judge_endpoint, gateway::Gateway& gateway,
                                 const AnswerFn& answer, const JudgeOptions& options = {});

double round2(double v);

/// Fixed-width table: one row per candidate, one column per criterion.
std::string format_report(const EvaluationReport& report);

}  // namespace copilot::judge
