#include "copilot/sql/dataset.hpp"

#include <fstream>
#include <random>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"

namespace copilot::sql {

using nlohmann::json;

const char* const kSqlInstruction = "Given the schema, write one SQL query. Return only SQL.";

std::string SqlExample::key() const { return question + '\x1f' + context + '\x1f' + answer; }

namespace {

std::string required_field(const json& record, const char* name, std::size_t line) {
  auto it = record.find(name);
  if (it == record.end() || !it->is_string()) {
    throw DatasetError("line " + std::to_string(line) + ": missing string field \"" + name + "\"");
  }
  std::string value = it->get<std::string>();
  if (text::trim(value).empty()) {
    throw DatasetError("line " + std::to_string(line) + ": empty field \"" + name + "\"");
  }
  return value;
}

}  // namespace

std::vector<SqlExample> load_sql_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path);
  std::vector<SqlExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw DatasetError("line " + std::to_string(line_no) + ": expected a JSON object");
    }
    SqlExample ex;
    ex.question = required_field(record, "question", line_no);
    ex.context = required_field(record, "context", line_no);
    ex.answer = required_field(record, "answer", line_no);
    try {
      parse_create_tables(ex.context);
    } catch (const ParseError& e) {
      throw DatasetError("line " + std::to_string(line_no) + ": bad context: " + e.what());
    }
    out.push_back(std::move(ex));
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<SqlExample>& examples, std::size_t eval_count,
                           std::uint64_t seed) {
  if (eval_count > examples.size()) {
    throw ConfigError("eval_count " + std::to_string(eval_count) + " exceeds " +
                      std::to_string(examples.size()) + " examples");
  }
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  text::seeded_shuffle(order, rng);

  DatasetSplit split;
  split.eval.reserve(eval_count);
  split.train.reserve(examples.size() - eval_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& ex = examples[order[i]];
    if (i < eval_count) {
      split.eval.push_back(ex);
      split.eval_keys.insert(ex.key());
    } else {
      split.train.push_back(ex);
    }
  }
  return split;
}

std::string build_fewshot_prompt(const SqlExample& target, const std::vector<SqlExample>& shots,
                                 std::size_t n_shots, const DatasetSplit* split) {
  if (shots.size() < n_shots) {
    throw ConfigError("requested " + std::to_string(n_shots) + " shots but only " +
                      std::to_string(shots.size()) + " supplied");
  }
  std::string prompt = kSqlInstruction;
  prompt += "\n\n";
  for (std::size_t i = 0; i < n_shots; ++i) {
    const auto& shot = shots[i];
    if (shot.key() == target.key() || (split != nullptr && split->in_eval(shot))) {
      throw LeakageError("shot " + std::to_string(i) + " (\"" + shot.question +
                         "\") is drawn from the evaluation split");
    }
    prompt += "Schema: " + shot.context + "\nQuestion: " + shot.question + "\nSQL: " + shot.answer +
              "\n\n";
  }
  prompt += "Schema: " + target.context + "\nQuestion: " + target.question + "\nSQL:";
  return prompt;
}

std::string extract_sql(const std::string& model_output) {
  std::string_view s = text::trim(model_output);
  if (s.substr(0, 3) == "```") {
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view() : s.substr(nl + 1);
    const auto fence = s.find("```");
    if (fence != std::string_view::npos) s = s.substr(0, fence);
    s = text::trim(s);
  }
  if (text::starts_with_icase(s, "SQL:")) s = text::trim(s.substr(4));

  // Cut at the first ';' outside string literals.
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"' || c == '`') {
      quote = c;
    } else if (c == ';') {
      s = s.substr(0, i);
      break;
    }
  }
  return std::string(text::trim(s));
}

}  // namespace copilot::sql
