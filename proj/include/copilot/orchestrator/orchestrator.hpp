#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "copilot/gateway/gateway.hpp"
#include "copilot/orchestrator/trace.hpp"
#include "copilot/qa/qa_agent.hpp"
#include "copilot/sql/dataset.hpp"

namespace copilot::orchestrator {

enum class IntentKind { DocQa, SqlQuery, TableExplain };
enum class IntentSource { Model, HeuristicFallback };

std::string to_string(IntentKind k);    // "DOC_QA", "SQL_QUERY", "TABLE_EXPLAIN"
std::string to_string(IntentSource s);  // "MODEL", "HEURISTIC_FALLBACK"

struct Intent {
  IntentKind kind = IntentKind::DocQa;
  IntentSource source = IntentSource::HeuristicFallback;
};

/// The model exchange behind a classification, if one happened.
struct RouterExchange {
  std::string prompt;
  std::optional<std::string> reply;
  std::string error;  // gateway failure message
};

std::string build_router_prompt(const std::string& user_text);

/// Keyword fallback: schema, table, "how many", average or total means
/// SQL_QUERY; anything else DOC_QA.
IntentKind heuristic_intent(const std::string& user_text);

/// Attachment means TABLE_EXPLAIN without a model call. Otherwise the
/// endpoint must reply with exactly one intent token; anything else,
/// including a gateway failure, falls back to the keyword heuristic.
Intent classify_intent(const std::string& user_text, bool attachment_present,
                       gateway::Gateway& gateway, const std::string& endpoint,
                       RouterExchange* exchange = nullptr);

struct CopilotConfig {
  std::string router_endpoint;
  std::string qa_endpoint;
  std::string sql_endpoint;
  std::string rephrase_endpoint;  // empty: table answers are the oracle text
  std::size_t k = qa::kDefaultTopK;
  std::size_t n_shots = sql::kDefaultShots;
  std::string sql_context;  // CREATE TABLE statements offered to SQL questions
  std::vector<sql::SqlExample> sql_shots;
};

struct TurnError {
  std::string code;
  std::string message;
  std::string endpoint;  // set for gateway failures
};

struct TurnResult {
  std::string answer;
  Intent intent;
  std::string trace_id;
  std::optional<TurnError> error;
};

using KnowledgeSource = std::function<std::shared_ptr<const qa::KnowledgeBase>()>;

class Copilot {
 public:
  Copilot(gateway::Gateway& gateway, SessionStore& store, CopilotConfig config,
          KnowledgeSource knowledge);

  /// Classifies, dispatches and records one turn. Agent failures become an
  /// apologetic answer with `error` set; the session carries on. Throws
  /// NotFound for an unknown session.
  TurnResult handle_turn(const std::string& session_id, const std::string& user_text,
                         const std::optional<std::string>& attachment_csv = std::nullopt);

  const CopilotConfig& config() const { return config_; }

 private:
  std::string doc_qa(const std::string& text, TurnTrace& trace);
  std::string sql_query(const std::string& text, TurnTrace& trace);
  std::string table_explain(const std::string& text, const std::optional<std::string>& csv,
                            TurnTrace& trace);
  std::string complete_traced(const std::string& endpoint, const std::string& prompt,
                              const std::string& label, TurnTrace& trace);

  gateway::Gateway& gateway_;
  SessionStore& store_;
  CopilotConfig config_;
  KnowledgeSource knowledge_;
};

}  // namespace copilot::orchestrator
