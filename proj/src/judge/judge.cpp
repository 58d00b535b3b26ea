#include "copilot/judge/judge.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "copilot/common/parallel.hpp"
#include "copilot/common/text.hpp"

namespace copilot::judge {

using nlohmann::json;

std::string to_string(Criterion c) { return text::to_upper(display_name(c)); }

std::string display_name(Criterion c) {
  switch (c) {
    case Criterion::Accuracy: return "accuracy";
    case Criterion::Relevance: return "relevance";
    case Criterion::Thoroughness: return "thoroughness";
    case Criterion::Clarity: return "clarity";
    case Criterion::Conciseness: return "conciseness";
  }
  return "accuracy";
}

const RubricSet& default_rubrics() {
  static const RubricSet kRubrics = {
      "v1",
      {
          {Criterion::Accuracy,
           "The answer states facts that agree with the reference and makes no claim that "
           "contradicts it."},
          {Criterion::Relevance,
           "The answer addresses the question that was asked rather than a neighbouring topic."},
          {Criterion::Thoroughness, "The answer covers every key point that the reference covers."},
          {Criterion::Clarity, "The answer is easy to follow, with plain wording and a logical order."},
          {Criterion::Conciseness,
           "The answer carries no filler, repetition or material beyond what the question needs."},
      }};
  return kRubrics;
}

RubricSet load_rubrics(const std::string& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("rubric file " + path + ": " + e.what());
  }
  RubricSet set;
  set.version = doc.value("version", "");
  if (set.version.empty()) throw ConfigError("rubric file " + path + ": missing version");
  const auto& rubrics = doc.contains("rubrics") ? doc["rubrics"] : json::object();
  for (Criterion c : kCriteria) {
    auto it = rubrics.find(display_name(c));
    if (it == rubrics.end() || !it->is_string() || it->get<std::string>().empty()) {
      throw ConfigError("rubric file " + path + ": missing rubric for " + display_name(c));
    }
    set.rubrics[c] = it->get<std::string>();
  }
  return set;
}

std::string build_judge_prompt(const std::string& question, const std::string& reference,
                               const std::string& candidate, const RubricSet& rubrics) {
  if (text::trim(question).empty() || text::trim(reference).empty() ||
      text::trim(candidate).empty()) {
    throw ConfigError("judge prompt needs a question, a reference and a candidate answer");
  }
  std::string p =
      "You are grading an answer to a marketing analytics question against a reference answer "
      "written by an expert. Score each criterion on an integer scale from 1 (poor) to 5 "
      "(excellent).\n\nCriteria:\n";
  for (Criterion c : kCriteria) p += "- " + display_name(c) + ": " + rubrics.rubrics.at(c) + "\n";
  p += "\nQuestion:\n" + question + "\n\nReference answer:\n" + reference +
       "\n\nCandidate answer:\n" + candidate +
       "\n\nReply with exactly five lines, one per criterion in the order listed, each formatted "
       "as the criterion name, a colon, a space and the integer score. Do not add anything else.";
  return p;
}

JudgeScore parse_judge_response(const std::string& text) {
  JudgeScore score;
  for (const auto& raw : text::split(text, '\n')) {
    const std::string_view line = text::trim(raw);
    std::optional<Criterion> which;
    std::string_view rest;
    for (Criterion c : kCriteria) {
      const std::string name = display_name(c);
      if (!text::starts_with_icase(line, name)) continue;
      std::string_view after = text::trim(line.substr(name.size()));
      if (after.empty() || after.front() != ':') continue;
      which = c;
      rest = text::trim(after.substr(1));
      break;
    }
    if (!which) continue;
    if (score.scores.count(*which) > 0) {
      throw ParseError({}, "duplicate line for " + to_string(*which));
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
    if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw ParseError({}, to_string(*which) + " score is not an integer: \"" + std::string(rest) +
                               "\"");
    }
    if (value < 1 || value > 5) {
      throw RangeError(to_string(*which) + " score " + std::to_string(value) +
                       " is outside 1..5");
    }
    score.scores[*which] = value;
  }
  std::set<Criterion> missing;
  for (Criterion c : kCriteria) {
    if (score.scores.count(c) == 0) missing.insert(c);
  }
  if (!missing.empty()) {
    std::vector<std::string> names;
    for (Criterion c : missing) names.push_back(to_string(c));
    throw ParseError(missing, "missing criteria: " + text::join(names, ", "));
  }
  return score;
}

std::vector<JudgeQuestion> load_judge_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open questions file " + path);
  std::vector<JudgeQuestion> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json rec = json::parse(line);
      JudgeQuestion q;
      q.id = rec.at("id").is_string() ? rec.at("id").get<std::string>() : rec.at("id").dump();
      q.question = rec.at("question").get<std::string>();
      q.reference = rec.at("reference").get<std::string>();
      if (q.id.empty() || text::trim(q.question).empty() || text::trim(q.reference).empty()) {
        throw ConfigError("empty field");
      }
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw DatasetError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

namespace {

struct Cell {
  std::optional<JudgeScore> score;
  std::string reason;
};

Cell judge_cell(const std::string& candidate, const JudgeQuestion& q,
                const std::string& judge_endpoint, gateway::Gateway& gateway,
                const AnswerFn& answer, const RubricSet& rubrics) {
  Cell cell;
  std::string candidate_answer;
  try {
    candidate_answer = answer(candidate, q);
  } catch (const std::exception& e) {
    cell.reason = std::string("candidate answer failed: ") + e.what();
    return cell;
  }
  if (text::trim(candidate_answer).empty()) {
    cell.reason = "candidate answer is empty";
    return cell;
  }

  auto req = gateway::CompletionRequest::from_prompt(
      build_judge_prompt(q.question, q.reference, candidate_answer, rubrics));
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = gateway.complete(judge_endpoint, req);
    } catch (const std::exception& e) {
      cell.reason = std::string("judge call failed: ") + e.what();
      return cell;
    }
    try {
      JudgeScore s = parse_judge_response(reply);
      s.judge_endpoint = judge_endpoint;
      s.question_id = q.id;
      s.candidate = candidate;
      cell.score = std::move(s);
      cell.reason.clear();
      return cell;
    } catch (const Error& e) {
      cell.reason = "judge reply unusable after retry: " + std::string(e.what());
      req.messages.push_back({"assistant", reply});
      req.messages.push_back(
          {"user", "Your reply could not be read (" + std::string(e.what()) +
                       "). Answer again with exactly five lines of the form name: score, "
                       "using integer scores from 1 to 5."});
    }
  }
  return cell;
}

}  // namespace

EvaluationReport run_judged_eval(const std::vector<JudgeQuestion>& questions,
                                 const std::vector<std::string>& candidates,
                                 const std::string& judge_endpoint, gateway::Gateway& gateway,
                                 const AnswerFn& answer, const JudgeOptions& options) {
  if (questions.empty()) throw ConfigError("judged evaluation needs at least one question");
  if (candidates.empty()) throw ConfigError("judged evaluation needs at least one candidate");
  const RubricSet& rubrics = options.rubrics != nullptr ? *options.rubrics : default_rubrics();

  const std::size_t nq = questions.size();
  std::vector<Cell> cells(candidates.size() * nq);
  parallel_for(cells.size(), options.workers, [&](std::size_t i) {
    cells[i] = judge_cell(candidates[i / nq], questions[i % nq], judge_endpoint, gateway, answer,
                          rubrics);
  });

  EvaluationReport report;
  report.judge_endpoint = judge_endpoint;
  report.rubric_version = rubrics.version;
  report.transcript_ref = gateway.transcript().reference();
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    CandidateSummary summary;
    summary.candidate = candidates[ci];
    std::map<Criterion, long> sums;
    for (std::size_t qi = 0; qi < nq; ++qi) {
      Cell& cell = cells[ci * nq + qi];
      if (!cell.score) {
        ++summary.excluded;
        report.exclusions.push_back({candidates[ci], questions[qi].id, cell.reason});
        continue;
      }
      ++summary.included;
      for (const auto& [c, v] : cell.score->scores) sums[c] += v;
      report.scores.push_back(std::move(*cell.score));
    }
    if (summary.included > 0) {
      for (Criterion c : kCriteria) {
        summary.means[c] =
            round2(static_cast<double>(sums[c]) / static_cast<double>(summary.included));
      }
    }
    report.candidates.push_back(std::move(summary));
  }
  if (report.scores.empty()) {
    throw EvalError("every candidate/question pair failed; first reason: " +
                    report.exclusions.front().reason);
  }
  return report;
}

std::string format_report(const EvaluationReport& report) {
  std::size_t width = 9;
  for (const auto& c : report.candidates) width = std::max(width, c.candidate.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = "judge: " + report.judge_endpoint + "  rubrics: " + report.rubric_version +
                    "  transcript: " + report.transcript_ref + "\n";
  out += pad("candidate", width);
  for (Criterion c : kCriteria) out += "  " + pad(display_name(c), 12);
  out += "  n\n";
  for (const auto& c : report.candidates) {
    out += pad(c.candidate, width);
    for (Criterion k : kCriteria) {
      std::string cell = "-";
      if (auto it = c.means.find(k); it != c.means.end()) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", it->second);
        cell = buf;
      }
      out += "  " + pad(cell, 12);
    }
    out += "  " + std::to_string(c.included);
    if (c.excluded > 0) out += " (" + std::to_string(c.excluded) + " excluded)";
    out += "\n";
  }
  return out;
}

}  // namespace copilot::judge
