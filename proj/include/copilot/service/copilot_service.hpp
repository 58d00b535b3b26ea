#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "copilot/gateway/gateway.hpp"
#include "copilot/index/embedding.hpp"
#include "copilot/ingest/corpus.hpp"
#include "copilot/judge/judge.hpp"
#include "copilot/orchestrator/orchestrator.hpp"
#include "copilot/qa/qa_agent.hpp"
#include "copilot/service/config.hpp"
#include "copilot/service/report.hpp"
#include "copilot/table/attribution.hpp"

namespace copilot::service {

struct AddDocumentResult {
  std::string doc_id;
  std::size_t chunks = 0;
};

struct RebuildResult {
  std::size_t dimension = 0;
  std::size_t count = 0;
};

struct SqlEvalRequest {
  std::string dataset;
  std::string model;
  std::optional<std::size_t> shots;
  std::optional<std::size_t> eval_count;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
};

struct TableEvalRequest {
  std::size_t n = 1000;
  std::optional<std::uint64_t> seed;
  std::string model;
  table::RowFormat format = table::RowFormat::Csv;
  bool strict = false;
};

struct QaEvalRequest {
  std::vector<judge::JudgeQuestion> questions;
  std::string questions_path;  // used when `questions` is empty
  std::vector<std::string> candidates;
  std::string judge;
  std::optional<std::size_t> k;
};

/// Everything behind the HTTP routes and the CLI: corpus and index
/// management, chat sessions, evaluation runs and their reports.
class CopilotService {
 public:
  explicit CopilotService(ServiceConfig config);

  const ServiceConfig& config() const { return config_; }
  gateway::Gateway& gateway() { return *gateway_; }

  AddDocumentResult add_document(const ingest::Origin& origin);

  /// Rebuilds the index from the corpus store and swaps it in. Throws
  /// IndexBusy if another rebuild is running.
  RebuildResult rebuild_index();

  /// Current knowledge base, or null before the first build.
  std::shared_ptr<const qa::KnowledgeBase> knowledge() const;

  std::string create_session();
  orchestrator::TurnResult post_message(const std::string& session_id, const std::string& text,
                                        const std::optional<std::string>& attachment_csv);
  orchestrator::Session get_session(const std::string& id) const;
  orchestrator::TurnTrace get_trace(const std::string& id) const;

  RunReport eval_sql(const SqlEvalRequest& req);
  RunReport eval_table(const TableEvalRequest& req);
  RunReport eval_qa(const QaEvalRequest& req);
  RunReport get_report(const std::string& run_id) const;

  /// Rebinds the copilot after routing or shot settings change.
  void set_copilot_config(orchestrator::CopilotConfig config);

 private:
  std::shared_ptr<index::EmbeddingProvider> make_provider() const;
  void try_load_index();
  RunReport finish(RunReport report, nlohmann::json request);

  ServiceConfig config_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::shared_ptr<index::EmbeddingProvider> provider_;
  ingest::CorpusStore corpus_;
  orchestrator::SessionStore sessions_;
  ReportStore reports_;
  std::unique_ptr<orchestrator::Copilot> copilot_;

  mutable std::mutex kb_mutex_;
  std::shared_ptr<const qa::KnowledgeBase> kb_;
  std::mutex rebuild_mutex_;
  std::mutex corpus_mutex_;
};

/// Builds a backend from an endpoint entry: HTTP chat client or scripted
/// rules ({"substring"|"fingerprint"|"any", "response"}).
std::shared_ptr<gateway::ModelBackend> make_backend(const EndpointConfig& ep);

}  // namespace copilot::service
