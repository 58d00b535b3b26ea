#include "copilot/service/copilot_service.hpp"

#include <cstdlib>
#include <filesystem>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"
#include "copilot/index/vector_index.hpp"
#include "copilot/ingest/chunker.hpp"
#include "copilot/sql/dataset.hpp"
#include "copilot/sql/scoring.hpp"
#include "copilot/table/scoring.hpp"

namespace copilot::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::shared_ptr<gateway::ModelBackend> make_backend(const EndpointConfig& ep) {
  if (ep.kind == "scripted") {
    std::vector<gateway::ScriptRule> rules;
    for (const auto& r : ep.rules) {
      const std::string response = r.value("response", "");
      if (r.contains("substring")) {
        rules.push_back(gateway::ScriptRule::substring(r["substring"].get<std::string>(), response));
      } else if (r.contains("fingerprint")) {
        rules.push_back(
            gateway::ScriptRule::fingerprint(r["fingerprint"].get<std::string>(), response));
      } else if (r.value("any", false)) {
        rules.push_back(gateway::ScriptRule::fallback(response));
      } else {
        throw ConfigError("endpoint " + ep.name + ": rule needs substring, fingerprint or any");
      }
    }
    return gateway::scripted_model(std::move(rules));
  }
  gateway::ModelEndpoint me;
  me.name = ep.name;
  me.base_url = ep.base_url;
  me.model = ep.model.empty() ? ep.name : ep.model;
  me.auth_ref = ep.auth_env;
  me.timeout = std::chrono::milliseconds(ep.timeout_ms);
  me.max_retries = ep.max_retries;
  me.max_concurrency = ep.max_concurrency;
  return std::make_shared<gateway::HttpChatBackend>(me);
}

namespace {

gateway::Transcript open_transcript(const ServiceConfig& c) {
  if (c.transcript_path.empty()) return {};
  return gateway::Transcript::open(c.transcript_path);
}

}  // namespace

CopilotService::CopilotService(ServiceConfig config)
    : config_(std::move(config)),
      gateway_(std::make_unique<gateway::Gateway>(gateway::parse_gateway_mode(config_.gateway_mode),
                                                  open_transcript(config_))),
      provider_(make_provider()),
      corpus_(config_.corpus_dir),
      sessions_(config_.data_dir.empty() ? std::string()
                                         : (fs::path(config_.data_dir) / "sessions").string()),
      reports_(config_.data_dir.empty() ? std::string()
                                        : (fs::path(config_.data_dir) / "reports").string()) {
  for (const auto& ep : config_.endpoints) {
    gateway_->register_endpoint(ep.name, make_backend(ep), ep.max_concurrency);
    if (!ep.auth_env.empty() && std::getenv(ep.auth_env.c_str()) == nullptr) {
      gateway_->mark_degraded(ep.name, "credential env var " + ep.auth_env + " is not set");
    }
  }
  orchestrator::CopilotConfig cc;
  cc.router_endpoint = config_.router_endpoint;
  cc.qa_endpoint = config_.qa_endpoint;
  cc.sql_endpoint = config_.sql_endpoint;
  cc.rephrase_endpoint = config_.rephrase_endpoint;
  cc.k = config_.k;
  cc.n_shots = config_.n_shots;
  cc.sql_context = config_.sql_context;
  if (!config_.sql_shots_path.empty()) cc.sql_shots = sql::load_sql_dataset(config_.sql_shots_path);
  set_copilot_config(std::move(cc));
  try_load_index();
}

std::shared_ptr<index::EmbeddingProvider> CopilotService::make_provider() const {
  if (config_.embedding_provider == "remote") {
    index::RemoteEmbedderConfig rc;
    rc.url = config_.embedding_url;
    rc.model = config_.embedding_model;
    rc.auth_env = config_.embedding_auth_env;
    return std::make_shared<index::RemoteEmbedder>(rc);
  }
  return std::make_shared<index::MockEmbedder>(config_.embedding_dimension);
}

void CopilotService::try_load_index() {
  if (!fs::exists(config_.index_path)) return;
  index::VectorIndex idx = index::load_index(config_.index_path);
  if (idx.provider_tag() != provider_->tag()) return;  // stale: built by another embedder
  std::unordered_map<std::string, std::string> texts;
  for (const auto& c : corpus_.chunks()) texts.emplace(c.chunk_id, c.text);
  for (const auto& r : idx.records()) {
    if (texts.count(r.chunk_id) == 0) return;  // index and corpus disagree
  }
  auto kb = std::make_shared<const qa::KnowledgeBase>(
      qa::KnowledgeBase{std::move(idx), std::move(texts), provider_});
  std::lock_guard lock(kb_mutex_);
  kb_ = std::move(kb);
}

void CopilotService::set_copilot_config(orchestrator::CopilotConfig config) {
  copilot_ = std::make_unique<orchestrator::Copilot>(*gateway_, sessions_, std::move(config),
                                                     [this] { return knowledge(); });
}

AddDocumentResult CopilotService::add_document(const ingest::Origin& origin) {
  std::lock_guard lock(corpus_mutex_);
  const std::string doc_id = corpus_.reserve_doc_ids(1).front();
  const auto doc = ingest::fetch_document(origin, doc_id);
  const auto chunks = ingest::chunk_document(doc, config_.max_chunk_tokens);
  corpus_.append(doc, chunks);
  return {doc_id, chunks.size()};
}

RebuildResult CopilotService::rebuild_index() {
  std::unique_lock lock(rebuild_mutex_, std::try_to_lock);
  if (!lock.owns_lock()) throw IndexBusy("an index rebuild is already in progress");
  auto kb = qa::build_knowledge_base(corpus_.chunks(), provider_);
  index::save_index(kb->index, config_.index_path);
  RebuildResult out{kb->index.dimension(), kb->index.size()};
  std::lock_guard kb_lock(kb_mutex_);
  kb_ = std::move(kb);
  return out;
}

std::shared_ptr<const qa::KnowledgeBase> CopilotService::knowledge() const {
  std::lock_guard lock(kb_mutex_);
  return kb_;
}

std::string CopilotService::create_session() { return sessions_.create_session(); }

orchestrator::TurnResult CopilotService::post_message(const std::string& session_id,
                                                      const std::string& text,
                                                      const std::optional<std::string>& attachment_csv) {
  return copilot_->handle_turn(session_id, text, attachment_csv);
}

orchestrator::Session CopilotService::get_session(const std::string& id) const {
  return sessions_.get_session(id);
}

orchestrator::TurnTrace CopilotService::get_trace(const std::string& id) const {
  return sessions_.get_trace(id);
}

RunReport CopilotService::get_report(const std::string& run_id) const { return reports_.get(run_id); }

RunReport CopilotService::finish(RunReport report, json request) {
  report.run_id = text::random_id("run-");
  report.transcript_ref = gateway_->transcript().reference();
  report.config = {{"request", std::move(request)},
                   {"gateway_mode", gateway::to_string(gateway_->mode())},
                   {"embedding", provider_->tag()},
                   {"service", config_.to_json()}};
  reports_.put(report);
  return report;
}

RunReport CopilotService::eval_sql(const SqlEvalRequest& req) {
  if (req.dataset.empty()) throw ConfigError("dataset path is required");
  if (req.model.empty()) throw ConfigError("model is required");
  const auto examples = sql::load_sql_dataset(req.dataset);
  sql::SqlEvalOptions opt;
  opt.n_shots = req.shots.value_or(config_.n_shots);
  opt.eval_count = req.eval_count.value_or(std::min(config_.eval_count, examples.size()));
  opt.seed = req.seed.value_or(config_.seed);
  opt.lenient = req.lenient;
  opt.workers = config_.workers;
  const auto result = sql::run_sql_eval(examples, *gateway_, req.model, opt);

  RunReport report;
  report.kind = RunKind::SqlEval;
  const std::size_t n = result.items.size();
  report.metrics.push_back(
      {req.model, "accuracy_strict", result.strict.accuracy, result.strict.matches, n});
  report.metrics.push_back(
      {req.model, "accuracy_lenient", result.lenient.accuracy, result.lenient.matches, n});
  json diffs = json::array();
  for (const auto& item : result.items) {
    const auto& v = opt.lenient ? item.lenient : item.strict;
    report.items.push_back({{"question", item.question},
                            {"reference", item.reference},
                            {"prediction", item.prediction},
                            {"strict", sql::to_string(item.strict.kind)},
                            {"lenient", sql::to_string(item.lenient.kind)},
                            {"detail", v.detail}});
    if (!v.matched() && diffs.size() < 10) {
      diffs.push_back({{"question", item.question}, {"kind", sql::to_string(v.kind)}, {"detail", v.detail}});
    }
  }
  report.summary = {{"match_mode", opt.lenient ? "lenient" : "strict"},
                    {"histogram", result.histogram},
                    {"shots", result.shot_questions},
                    {"sample_diffs", std::move(diffs)}};
  json request = {{"dataset", req.dataset}, {"model", req.model},   {"shots", opt.n_shots},
                  {"eval_count", opt.eval_count}, {"seed", opt.seed}, {"lenient", opt.lenient}};
  return finish(std::move(report), std::move(request));
}

RunReport CopilotService::eval_table(const TableEvalRequest& req) {
  if (req.model.empty()) throw ConfigError("model is required");
  if (req.n == 0) throw ConfigError("n must be at least 1");
  table::TableEvalOptions opt;
  opt.n = req.n;
  opt.seed = req.seed.value_or(config_.seed);
  opt.format = req.format;
  opt.strict = req.strict;
  opt.workers = config_.workers;
  const auto result = table::run_table_eval(*gateway_, req.model, opt);

  RunReport report;
  report.kind = RunKind::TableEval;
  report.metrics.push_back(
      {req.model, "accuracy", result.score.accuracy, result.score.correct, result.items.size()});
  std::size_t zero_change = 0;
  for (const auto& item : result.items) {
    if (item.row.absolute_change == 0) ++zero_change;
    json factors = json::object();
    for (const auto& [name, score] : item.row.factor_scores) factors[name] = score;
    report.items.push_back({{"model_name", item.row.model_name},
                            {"channel", item.row.channel},
                            {"absolute_change", item.row.absolute_change},
                            {"factors", std::move(factors)},
                            {"output", item.output},
                            {"correct", item.verdict.correct},
                            {"reason", item.verdict.reason}});
  }
  report.summary = {{"format", table::to_string(opt.format)},
                    {"grading", opt.strict ? "strict" : "class"},
                    {"zero_change_rows", zero_change},
                    {"zero_change_wording", "absolute change 0 is explained as \"no change\""}};
  json request = {{"n", opt.n}, {"seed", opt.seed}, {"model", req.model},
                  {"format", table::to_string(opt.format)}, {"strict", opt.strict}};
  return finish(std::move(report), std::move(request));
}

RunReport CopilotService::eval_qa(const QaEvalRequest& req) {
  if (req.judge.empty()) throw ConfigError("judge endpoint is required");
  if (req.candidates.empty()) throw ConfigError("at least one candidate is required");
  const auto questions =
      req.questions.empty() ? judge::load_judge_questions(req.questions_path) : req.questions;
  if (!knowledge()) rebuild_index();
  const auto kb = knowledge();
  const std::size_t k = req.k.value_or(config_.k);
  judge::AnswerFn answer = [&](const std::string& candidate, const judge::JudgeQuestion& q) {
    return qa::QaAgent(kb, *gateway_).answer_question(q.question, k, candidate).answer;
  };
  judge::JudgeOptions opt;
  opt.workers = config_.workers;
  const auto result = judge::run_judged_eval(questions, req.candidates, req.judge, *gateway_, answer, opt);

  RunReport report;
  report.kind = RunKind::QaJudge;
  for (const auto& c : result.candidates) {
    for (const auto& [criterion, mean] : c.means) {
      report.metrics.push_back({c.candidate, judge::display_name(criterion), mean, std::nullopt, c.included});
    }
  }
  for (const auto& s : result.scores) {
    json scores = json::object();
    for (const auto& [criterion, v] : s.scores) scores[judge::display_name(criterion)] = v;
    report.items.push_back(
        {{"candidate", s.candidate}, {"question_id", s.question_id}, {"scores", std::move(scores)}});
  }
  json exclusions = json::array();
  for (const auto& e : result.exclusions) {
    exclusions.push_back({{"candidate", e.candidate}, {"question_id", e.question_id}, {"reason", e.reason}});
  }
  report.summary = {{"judge", result.judge_endpoint},
                    {"rubric_version", result.rubric_version},
                    {"exclusions", std::move(exclusions)},
                    {"table", judge::format_report(result)}};
  json qs = json::array();
  for (const auto& q : questions) qs.push_back({{"id", q.id}, {"question", q.question}, {"reference", q.reference}});
  json request = {{"questions", std::move(qs)}, {"candidates", req.candidates}, {"judge", req.judge}, {"k", k}};
  return finish(std::move(report), std::move(request));
}

}  // namespace copilot::service
