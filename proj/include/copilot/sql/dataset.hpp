#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace copilot::sql {

inline constexpr std::size_t kDefaultEvalCount = 1000;
inline constexpr std::uint64_t kDefaultSplitSeed = 20240101;
inline constexpr std::size_t kDefaultShots = 5;

struct SqlExample {
  std::string question;
  std::string context;  // one or more CREATE TABLE statements
  std::string answer;   // reference SQL

  /// Identity used for leakage checks.
  std::string key() const;

  bool operator==(const SqlExample&) const = default;
};

/// Reads line-delimited JSON records with string fields question, context
/// and answer. Blank lines are skipped. Throws DatasetError naming the
/// 1-based line for malformed JSON, missing/empty fields or a context that
/// is not CREATE TABLE DDL.
std::vector<SqlExample> load_sql_dataset(const std::string& path);

struct DatasetSplit {
  std::vector<SqlExample> train;
  std::vector<SqlExample> eval;
  std::set<std::string> eval_keys;

  bool in_eval(const SqlExample& ex) const { return eval_keys.count(ex.key()) > 0; }
};

/// Seeded shuffle, then the first `eval_count` go to eval and the rest to
/// train. ConfigError when eval_count exceeds the example count.
DatasetSplit split_dataset(const std::vector<SqlExample>& examples,
                           std::size_t eval_count = kDefaultEvalCount,
                           std::uint64_t seed = kDefaultSplitSeed);

extern const char* const kSqlInstruction;

/// Instruction, then the first `n_shots` of `shots` as Schema/Question/SQL
/// blocks, then the target's schema and question with an open "SQL:" line.
/// LeakageError if a shot is the target or belongs to `split`'s eval side;
/// ConfigError if fewer than n_shots shots are supplied.
std::string build_fewshot_prompt(const SqlExample& target, const std::vector<SqlExample>& shots,
                                 std::size_t n_shots = kDefaultShots,
                                 const DatasetSplit* split = nullptr);

/// Pulls the query out of a model reply: drops code fences and a leading
/// "SQL:" label, keeps text up to the first statement terminator.
std::string extract_sql(const std::string& model_output);

}  // namespace copilot::sql
