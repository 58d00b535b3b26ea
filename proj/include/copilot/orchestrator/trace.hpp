#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace copilot::orchestrator {

enum class StepKind { Intent, Retrieval, Prompt, ModelOutput, Verdict, Final };

std::string to_string(StepKind k);  // "INTENT", ...
StepKind parse_step_kind(const std::string& s);

struct TraceStep {
  StepKind kind = StepKind::Intent;
  std::string payload;
  std::string label;  // which sub-task produced it, e.g. "router"
  std::int64_t timestamp_us = 0;
};

class TurnTrace {
 public:
  TurnTrace() = default;
  TurnTrace(std::string trace_id, std::string session_id);

  /// Appends a step stamped strictly after the previous one.
  void add(StepKind kind, std::string payload, std::string label = {});

  const std::string& trace_id() const { return trace_id_; }
  const std::string& session_id() const { return session_id_; }
  const std::vector<TraceStep>& steps() const { return steps_; }

  nlohmann::json to_json() const;
  static TurnTrace from_json(const nlohmann::json& j);

 private:
  std::string trace_id_;
  std::string session_id_;
  std::vector<TraceStep> steps_;
};

struct SessionTurn {
  std::string user_text;
  std::string attachment_ref;  // empty when the turn had no attachment
  std::string answer;
  std::string intent;
  std::string trace_id;
  std::int64_t timestamp_ms = 0;
};

struct Session {
  std::string session_id;
  std::int64_t created_ms = 0;
  std::vector<SessionTurn> turns;
};

nlohmann::json to_json(const SessionTurn& turn);
nlohmann::json to_json(const Session& session);

/// Sessions and traces. With a data directory, sessions are append-only
/// JSONL files under sessions/ and each trace is a JSON file under traces/;
/// existing files are loaded on construction. Without one everything lives
/// in memory.
class SessionStore {
 public:
  explicit SessionStore(std::string data_dir = {});

  std::string create_session();
  bool has_session(const std::string& id) const;
  Session get_session(const std::string& id) const;  // NotFound
  std::vector<std::string> session_ids() const;

  void append_turn(const std::string& session_id, SessionTurn turn, const TurnTrace& trace);
  TurnTrace get_trace(const std::string& trace_id) const;  // NotFound

  /// Held for the duration of a turn so each session runs one turn at a time.
  std::unique_lock<std::mutex> lock_session(const std::string& id);

 private:
  void load();

  std::string dir_;
  mutable std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, TurnTrace> traces_;
  std::map<std::string, std::unique_ptr<std::mutex>> turn_locks_;
};

}  // namespace copilot::orchestrator
