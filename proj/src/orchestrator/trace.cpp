#include "copilot/orchestrator/trace.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::Intent: return "INTENT";
    case StepKind::Retrieval: return "RETRIEVAL";
    case StepKind::Prompt: return "PROMPT";
    case StepKind::ModelOutput: return "MODEL_OUTPUT";
    case StepKind::Verdict: return "VERDICT";
    case StepKind::Final: return "FINAL";
  }
  return "FINAL";
}

StepKind parse_step_kind(const std::string& s) {
  for (auto k : {StepKind::Intent, StepKind::Retrieval, StepKind::Prompt, StepKind::ModelOutput,
                 StepKind::Verdict, StepKind::Final}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown trace step kind \"" + s + "\"");
}

TurnTrace::TurnTrace(std::string trace_id, std::string session_id)
    : trace_id_(std::move(trace_id)), session_id_(std::move(session_id)) {}

void TurnTrace::add(StepKind kind, std::string payload, std::string label) {
  using namespace std::chrono;
  std::int64_t now =
      duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
  if (!steps_.empty() && now <= steps_.back().timestamp_us) now = steps_.back().timestamp_us + 1;
  steps_.push_back({kind, std::move(payload), std::move(label), now});
}

json TurnTrace::to_json() const {
  json steps = json::array();
  for (const auto& s : steps_) {
    json step = {{"kind", to_string(s.kind)}, {"payload", s.payload}, {"timestamp_us", s.timestamp_us}};
    if (!s.label.empty()) step["label"] = s.label;
    steps.push_back(std::move(step));
  }
  return {{"trace_id", trace_id_}, {"session_id", session_id_}, {"steps", std::move(steps)}};
}

TurnTrace TurnTrace::from_json(const json& j) {
  TurnTrace t(j.at("trace_id").get<std::string>(), j.value("session_id", ""));
  for (const auto& s : j.at("steps")) {
    t.steps_.push_back({parse_step_kind(s.at("kind").get<std::string>()),
                        s.at("payload").get<std::string>(), s.value("label", ""),
                        s.at("timestamp_us").get<std::int64_t>()});
  }
  return t;
}

json to_json(const SessionTurn& turn) {
  return {{"user_text", turn.user_text},   {"attachment_ref", turn.attachment_ref},
          {"answer", turn.answer},         {"intent", turn.intent},
          {"trace_id", turn.trace_id},     {"timestamp_ms", turn.timestamp_ms}};
}

json to_json(const Session& session) {
  json turns = json::array();
  for (const auto& t : session.turns) turns.push_back(to_json(t));
  return {{"session_id", session.session_id},
          {"created_ms", session.created_ms},
          {"turns", std::move(turns)}};
}

namespace {

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw ConfigError("cannot append to " + path.string());
}

}  // namespace

SessionStore::SessionStore(std::string data_dir) : dir_(std::move(data_dir)) {
  if (!dir_.empty()) {
    fs::create_directories(fs::path(dir_) / "sessions");
    fs::create_directories(fs::path(dir_) / "traces");
    load();
  }
}

void SessionStore::load() {
  for (const auto& entry : fs::directory_iterator(fs::path(dir_) / "traces")) {
    if (entry.path().extension() != ".json") continue;
    auto trace = TurnTrace::from_json(json::parse(text::read_file(entry.path().string())));
    traces_[trace.trace_id()] = std::move(trace);
  }
  for (const auto& entry : fs::directory_iterator(fs::path(dir_) / "sessions")) {
    if (entry.path().extension() != ".jsonl") continue;
    std::ifstream in(entry.path());
    Session s;
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception&) {
        break;  // torn final line from an interrupted write
      }
      if (rec.contains("created_ms")) {
        s.session_id = rec.at("session_id").get<std::string>();
        s.created_ms = rec.at("created_ms").get<std::int64_t>();
        continue;
      }
      SessionTurn t;
      t.user_text = rec.value("user_text", "");
      t.attachment_ref = rec.value("attachment_ref", "");
      t.answer = rec.value("answer", "");
      t.intent = rec.value("intent", "");
      t.trace_id = rec.value("trace_id", "");
      t.timestamp_ms = rec.value("timestamp_ms", std::int64_t{0});
      s.turns.push_back(std::move(t));
    }
    if (!s.session_id.empty()) sessions_[s.session_id] = std::move(s);
  }
}

std::string SessionStore::create_session() {
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = text::random_id("s-");
  } while (sessions_.count(id) > 0);
  Session s;
  s.session_id = id;
  s.created_ms = text::now_millis();
  if (!dir_.empty()) {
    append_line(fs::path(dir_) / "sessions" / (id + ".jsonl"),
                json{{"session_id", id}, {"created_ms", s.created_ms}}.dump());
  }
  sessions_[id] = std::move(s);
  return id;
}

bool SessionStore::has_session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return sessions_.count(id) > 0;
}

Session SessionStore::get_session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session " + id);
  return it->second;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void SessionStore::append_turn(const std::string& session_id, SessionTurn turn,
                               const TurnTrace& trace) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("unknown session " + session_id);
  if (traces_.count(trace.trace_id()) > 0) {
    throw ConfigError("trace id " + trace.trace_id() + " already recorded");
  }
  if (!dir_.empty()) {
    text::write_file_atomic((fs::path(dir_) / "traces" / (trace.trace_id() + ".json")).string(),
                            trace.to_json().dump());
    append_line(fs::path(dir_) / "sessions" / (session_id + ".jsonl"), to_json(turn).dump());
  }
  traces_[trace.trace_id()] = trace;
  it->second.turns.push_back(std::move(turn));
}

TurnTrace SessionStore::get_trace(const std::string& trace_id) const {
  std::lock_guard lock(mutex_);
  auto it = traces_.find(trace_id);
  if (it == traces_.end()) throw NotFound("unknown trace " + trace_id);
  return it->second;
}

std::unique_lock<std::mutex> SessionStore::lock_session(const std::string& id) {
  std::mutex* m = nullptr;
  {
    std::lock_guard lock(mutex_);
    if (sessions_.count(id) == 0) throw NotFound("unknown session " + id);
    auto& slot = turn_locks_[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    m = slot.get();
  }
  return std::unique_lock<std::mutex>(*m);
}

}  // namespace copilot::orchestrator
