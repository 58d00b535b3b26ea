#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace copilot::service {

inline constexpr const char* kReportSchema = "copilot.report/v1";

enum class RunKind { QaJudge, SqlEval, TableEval };

std::string to_string(RunKind k);  // "QA_JUDGE", "SQL_EVAL", "TABLE_EVAL"
RunKind parse_run_kind(const std::string& s);

struct Metric {
  std::string candidate;
  std::string name;
  double value = 0.0;
  /// Ratio metrics carry their counts and render as a percentage.
  std::optional<std::size_t> numerator;
  std::optional<std::size_t> denominator;

  bool operator==(const Metric&) const = default;
};

struct RunReport {
  std::string run_id;
  RunKind kind = RunKind::SqlEval;
  std::vector<Metric> metrics;
  nlohmann::json items = nlohmann::json::array();  // per-item records
  nlohmann::json summary = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();  // snapshot sufficient to re-run
  std::string transcript_ref;
};

enum class ReportSink { HumanTable, MachineRecords };

/// Human table: one line per metric, highest value first (ties by candidate
/// then metric name). Ratios print as "100.0% (100/100)", others with two
/// decimals. Machine records: JSON lines tagged with kReportSchema: a "run"
/// header, one "metric" record per metric, one "item" record per item.
std::string emit_report(const RunReport& report, ReportSink sink);

/// Inverse of the machine-record rendering.
RunReport parse_machine_records(const std::string& text);

std::string format_metric_value(const Metric& m);

nlohmann::json to_json(const RunReport& report);

/// Reports kept in memory and, with a directory, as <run_id>.jsonl files.
class ReportStore {
 public:
  explicit ReportStore(std::string dir = {});

  void put(const RunReport& report);
  RunReport get(const std::string& run_id) const;  // NotFound
  bool has(const std::string& run_id) const;

 private:
  std::string dir_;
  mutable std::mutex mutex_;
  std::map<std::string, RunReport> reports_;
};

}  // namespace copilot::service
