#include "copilot/service/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::service {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(RunKind k) {
  switch (k) {
    case RunKind::QaJudge: return "QA_JUDGE";
    case RunKind::SqlEval: return "SQL_EVAL";
    case RunKind::TableEval: return "TABLE_EVAL";
  }
  return "SQL_EVAL";
}

RunKind parse_run_kind(const std::string& s) {
  for (auto k : {RunKind::QaJudge, RunKind::SqlEval, RunKind::TableEval}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown run kind \"" + s + "\"");
}

std::string format_metric_value(const Metric& m) {
  char buf[64];
  if (m.numerator && m.denominator) {
    std::snprintf(buf, sizeof buf, "%.1f%% (%zu/%zu)", m.value * 100.0, *m.numerator,
                  *m.denominator);
  } else if (m.denominator) {
    std::snprintf(buf, sizeof buf, "%.2f (n=%zu)", m.value, *m.denominator);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", m.value);
  }
  return buf;
}

namespace {

json metric_json(const std::string& run_id, const Metric& m) {
  json j = {{"schema", kReportSchema}, {"type", "metric"},  {"run_id", run_id},
            {"candidate", m.candidate}, {"metric", m.name}, {"value", m.value}};
  j["numerator"] = m.numerator ? json(*m.numerator) : json(nullptr);
  j["denominator"] = m.denominator ? json(*m.denominator) : json(nullptr);
  return j;
}

std::string human_table(const RunReport& report) {
  std::vector<const Metric*> rows;
  for (const auto& m : report.metrics) rows.push_back(&m);
  std::stable_sort(rows.begin(), rows.end(), [](const Metric* a, const Metric* b) {
    if (a->value != b->value) return a->value > b->value;
    if (a->candidate != b->candidate) return a->candidate < b->candidate;
    return a->name < b->name;
  });
  std::size_t wc = 9;
  std::size_t wm = 6;
  for (const auto* m : rows) {
    wc = std::max(wc, m->candidate.size());
    wm = std::max(wm, m->name.size());
  }
  auto pad = [](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  std::string out = to_string(report.kind) + " " + report.run_id + "\n";
  out += pad("candidate", wc) + "  " + pad("metric", wm) + "  value\n";
  for (const auto* m : rows) {
    out += pad(m->candidate, wc) + "  " + pad(m->name, wm) + "  " + format_metric_value(*m) + "\n";
  }
  return out;
}

}  // namespace

json to_json(const RunReport& report) {
  json metrics = json::array();
  for (const auto& m : report.metrics) {
    json j = metric_json(report.run_id, m);
    j.erase("schema");
    j.erase("type");
    j.erase("run_id");
    metrics.push_back(std::move(j));
  }
  return {{"schema", kReportSchema},
          {"run_id", report.run_id},
          {"kind", to_string(report.kind)},
          {"metrics", std::move(metrics)},
          {"items", report.items},
          {"summary", report.summary},
          {"config", report.config},
          {"transcript_ref", report.transcript_ref}};
}

std::string emit_report(const RunReport& report, ReportSink sink) {
  if (sink == ReportSink::HumanTable) return human_table(report);
  std::string out;
  out += json{{"schema", kReportSchema},
              {"type", "run"},
              {"run_id", report.run_id},
              {"kind", to_string(report.kind)},
              {"summary", report.summary},
              {"config", report.config},
              {"transcript_ref", report.transcript_ref}}
             .dump() +
         "\n";
  for (const auto& m : report.metrics) out += metric_json(report.run_id, m).dump() + "\n";
  for (const auto& item : report.items) {
    out += json{{"schema", kReportSchema}, {"type", "item"}, {"run_id", report.run_id}, {"record", item}}
               .dump() +
           "\n";
  }
  return out;
}

RunReport parse_machine_records(const std::string& text) {
  RunReport report;
  bool have_header = false;
  std::size_t line_no = 0;
  for (const auto& line : text::split(text, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DatasetError("report line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.value("schema", "") != kReportSchema) {
      throw DatasetError("report line " + std::to_string(line_no) + ": unsupported schema");
    }
    const std::string type = j.value("type", "");
    if (type == "run") {
      report.run_id = j.at("run_id").get<std::string>();
      report.kind = parse_run_kind(j.at("kind").get<std::string>());
      report.summary = j.value("summary", json::object());
      report.config = j.value("config", json::object());
      report.transcript_ref = j.value("transcript_ref", "");
      have_header = true;
    } else if (type == "metric") {
      Metric m;
      m.candidate = j.at("candidate").get<std::string>();
      m.name = j.at("metric").get<std::string>();
      m.value = j.at("value").get<double>();
      if (!j.at("numerator").is_null()) m.numerator = j.at("numerator").get<std::size_t>();
      if (!j.at("denominator").is_null()) m.denominator = j.at("denominator").get<std::size_t>();
      report.metrics.push_back(std::move(m));
    } else if (type == "item") {
      report.items.push_back(j.at("record"));
    } else {
      throw DatasetError("report line " + std::to_string(line_no) + ": unknown record type");
    }
  }
  if (!have_header) throw DatasetError("report has no run record");
  return report;
}

ReportStore::ReportStore(std::string dir) : dir_(std::move(dir)) {
  if (dir_.empty()) return;
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    try {
      RunReport r = parse_machine_records(text::read_file(entry.path().string()));
      reports_[r.run_id] = std::move(r);
    } catch (const std::exception&) {
      // unreadable report files are skipped
    }
  }
}

void ReportStore::put(const RunReport& report) {
  std::lock_guard lock(mutex_);
  if (!dir_.empty()) {
    text::write_file_atomic((fs::path(dir_) / (report.run_id + ".jsonl")).string(),
                            emit_report(report, ReportSink::MachineRecords));
  }
  reports_[report.run_id] = report;
}

RunReport ReportStore::get(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  auto it = reports_.find(run_id);
  if (it == reports_.end()) throw NotFound("unknown report " + run_id);
  return it->second;
}

bool ReportStore::has(const std::string& run_id) const {
  std::lock_guard lock(mutex_);
  return reports_.count(run_id) > 0;
}

}  // namespace copilot::service
