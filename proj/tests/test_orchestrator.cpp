#include <chrono>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/ingest/corpus.hpp"
#include "copilot/orchestrator/orchestrator.hpp"
#include "copilot/table/attribution.hpp"
#include "support.hpp"

using namespace copilot;
using namespace copilot::orchestrator;
using nlohmann::json;

namespace {

std::shared_ptr<const qa::KnowledgeBase> fixture_kb() {
  std::vector<ingest::DocumentChunk> chunks;
  std::size_t n = 0;
  for (const char* name : {"corpus/attribution.txt", "corpus/metrics.html"}) {
    const auto doc = ingest::fetch_document(
        ingest::Origin::text(testsupport::slurp(testsupport::fixture(name)), name), "doc-" + std::to_string(n++));
    for (auto& c : ingest::chunk_document(doc, 60)) chunks.push_back(std::move(c));
  }
  return qa::build_knowledge_base(chunks, std::make_shared<index::MockEmbedder>());
}

std::string router_reply(const gateway::CompletionRequest& r) {
  const std::string p = r.flattened();
  const std::string msg = p.substr(p.rfind("Message: ") + 9);
  if (msg.find("banana") != std::string::npos) return "banana";
  if (msg.find("How many") != std::string::npos) return "SQL_QUERY";
  return "DOC_QA";
}

struct Rig {
  testsupport::TempDir dir;
  gateway::Gateway gw;
  SessionStore store;
  std::shared_ptr<const qa::KnowledgeBase> kb = fixture_kb();
  std::unique_ptr<Copilot> copilot;

  explicit Rig(std::string sql_reply = "SELECT COUNT(*) FROM head WHERE age > 56")
      : store(dir.str()) {
    using gateway::ScriptRule;
    gw.register_endpoint("router", gateway::scripted_model({ScriptRule::dynamic(ScriptRule::Matcher::Any, "", router_reply)}));
    gw.register_endpoint("qa", gateway::scripted_model({ScriptRule::dynamic(
                                   ScriptRule::Matcher::Any, "", [](const gateway::CompletionRequest& r) {
                                     const std::string p = r.flattened();
                                     const auto s = p.find('\n', p.find("[1] ")) + 1;
                                     return p.substr(s, p.find("\n\n", s) - s);
                                   })}));
    gw.register_endpoint("sql", gateway::scripted_model({ScriptRule::fallback(std::move(sql_reply))}));
    CopilotConfig cfg;
    cfg.router_endpoint = "router";
    cfg.qa_endpoint = "qa";
    cfg.sql_endpoint = "sql";
    cfg.k = 2;
    cfg.sql_context = "CREATE TABLE head (age INTEGER)";
    copilot = std::make_unique<Copilot>(gw, store, cfg, [this] { return kb; });
  }
};

std::vector<std::string> kinds(const TurnTrace& t) {
  std::vector<std::string> out;
  for (const auto& s : t.steps()) out.push_back(to_string(s.kind));
  return out;
}

void expect_monotonic(const TurnTrace& t) {
  for (std::size_t i = 1; i < t.steps().size(); ++i) {
    EXPECT_LT(t.steps()[i - 1].timestamp_us, t.steps()[i].timestamp_us);
  }
}

}  // namespace

TEST(Router, AttachmentSkipsModel) {
  gateway::Gateway gw;
  gw.register_endpoint("router", gateway::scripted_model({gateway::ScriptRule::fallback("DOC_QA")}));
  const auto intent = classify_intent("explain this", true, gw, "router");
  EXPECT_EQ(intent.kind, IntentKind::TableExplain);
  EXPECT_EQ(gw.backend_calls("router"), 0u);
}

TEST(Router, ModelReplyAndFallback) {
  gateway::Gateway gw;
  gw.register_endpoint("sqlish", gateway::scripted_model({gateway::ScriptRule::fallback("SQL_QUERY")}));
  gw.register_endpoint("banana", gateway::scripted_model({gateway::ScriptRule::fallback("banana")}));
  const auto a = classify_intent("list all heads", false, gw, "sqlish");
  EXPECT_EQ(a.kind, IntentKind::SqlQuery);
  EXPECT_EQ(a.source, IntentSource::Model);
  const auto b = classify_intent("what is attribution?", false, gw, "banana");
  EXPECT_EQ(b.kind, IntentKind::DocQa);
  EXPECT_EQ(b.source, IntentSource::HeuristicFallback);
  // A gateway failure also falls back.
  RouterExchange ex;
  const auto c = classify_intent("how many rows are in the table?", false, gw, "missing", &ex);
  EXPECT_EQ(c.kind, IntentKind::SqlQuery);
  EXPECT_FALSE(ex.error.empty());
}

TEST(Turn, DocQaTraceOrder) {
  Rig rig;
  const auto sid = rig.store.create_session();
  const auto r = rig.copilot->handle_turn(sid, "What is ad cannibalization?");
  EXPECT_FALSE(r.error.has_value());
  EXPECT_EQ(r.intent.kind, IntentKind::DocQa);
  const auto trace = rig.store.get_trace(r.trace_id);
  EXPECT_EQ(kinds(trace), (std::vector<std::string>{"INTENT", "PROMPT", "MODEL_OUTPUT", "RETRIEVAL", "PROMPT",
                                                    "MODEL_OUTPUT", "FINAL"}));
  EXPECT_EQ(trace.steps()[1].label, "router");
  EXPECT_EQ(trace.steps()[4].label, "qa");
  EXPECT_EQ(trace.steps().back().payload, r.answer);
  expect_monotonic(trace);
}

TEST(Turn, SqlValidAndInvalid) {
  {
    Rig rig;
    const auto sid = rig.store.create_session();
    const auto r = rig.copilot->handle_turn(sid, "How many heads are older than 56?");
    EXPECT_EQ(r.intent.kind, IntentKind::SqlQuery);
    EXPECT_NE(r.answer.find("```sql"), std::string::npos);
    const auto trace = rig.store.get_trace(r.trace_id);
    bool valid = false;
    for (const auto& s : trace.steps()) valid = valid || (s.kind == StepKind::Verdict && s.payload.rfind("VALID: ", 0) == 0);
    EXPECT_TRUE(valid);
  }
  {
    Rig rig("SELECT FROM WHERE");
    const auto sid = rig.store.create_session();
    const auto r = rig.copilot->handle_turn(sid, "How many heads are older than 56?");
    EXPECT_NE(r.answer.find("not valid"), std::string::npos);
    const auto trace = rig.store.get_trace(r.trace_id);
    bool parse_error = false;
    for (const auto& s : trace.steps()) {
      parse_error = parse_error || (s.kind == StepKind::Verdict && s.payload.rfind("ParseError", 0) == 0);
    }
    EXPECT_TRUE(parse_error);
  }
}

TEST(Turn, TableAttachmentGivesOracleText) {
  Rig rig;
  const auto sid = rig.store.create_session();
  const auto r = rig.copilot->handle_turn(sid, "Explain this table", std::string(testsupport::kTable2Csv));
  EXPECT_EQ(r.intent.kind, IntentKind::TableExplain);
  EXPECT_NE(r.answer.find(testsupport::kTable2Explanation), std::string::npos);
  const auto trace = rig.store.get_trace(r.trace_id);
  EXPECT_EQ(kinds(trace), (std::vector<std::string>{"INTENT", "VERDICT", "FINAL"}));
  const auto verdict = json::parse(trace.steps()[1].payload);
  EXPECT_EQ(verdict[0]["factors"][0]["class"], "CONTRIBUTOR");
  EXPECT_EQ(verdict[0]["factors"][1]["class"], "NON_INFLUENTIAL");
  EXPECT_EQ(verdict[0]["factors"][2]["class"], "MITIGATOR");
  EXPECT_EQ(verdict[0]["direction"], "DECREASE");
  EXPECT_EQ(rig.store.get_session(sid).turns[0].attachment_ref.substr(0, 4), "csv:");
}

TEST(Turn, AgentErrorBecomesStructuredFinal) {
  Rig rig;
  rig.kb = nullptr;
  const auto sid = rig.store.create_session();
  const auto r = rig.copilot->handle_turn(sid, "What is attribution?");
  ASSERT_TRUE(r.error.has_value());
  EXPECT_EQ(r.error->code, "IndexNotBuilt");
  const auto trace = rig.store.get_trace(r.trace_id);
  EXPECT_EQ(to_string(trace.steps().front().kind), "INTENT");
  EXPECT_EQ(to_string(trace.steps().back().kind), "FINAL");
  EXPECT_EQ(json::parse(trace.steps().back().payload)["error"]["code"], "IndexNotBuilt");
  // The session survives and takes further turns.
  rig.kb = fixture_kb();
  EXPECT_FALSE(rig.copilot->handle_turn(sid, "What is attribution?").error.has_value());
  EXPECT_EQ(rig.store.get_session(sid).turns.size(), 2u);
}

TEST(Turn, UnknownSessionIsNotFound) {
  Rig rig;
  EXPECT_THROW(rig.copilot->handle_turn("s-nope", "hi"), NotFound);
}

TEST(Sessions, TurnsAreSerializedPerSession) {
  Rig rig;
  const auto sid = rig.store.create_session();
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { rig.copilot->handle_turn(sid, "What is attribution " + std::to_string(i) + "?"); });
  }
  for (auto& t : threads) t.join();
  const auto session = rig.store.get_session(sid);
  ASSERT_EQ(session.turns.size(), 8u);
  // Each turn's trace starts after the previous one ended.
  for (std::size_t i = 1; i < session.turns.size(); ++i) {
    const auto prev = rig.store.get_trace(session.turns[i - 1].trace_id);
    const auto cur = rig.store.get_trace(session.turns[i].trace_id);
    EXPECT_LT(prev.steps().back().timestamp_us, cur.steps().front().timestamp_us);
  }
}

TEST(Sessions, PersistAcrossStoreInstances) {
  testsupport::TempDir dir;
  std::string sid, tid;
  {
    SessionStore store(dir.str());
    sid = store.create_session();
    TurnTrace trace("t-1", sid);
    trace.add(StepKind::Intent, "{}", "router");
    trace.add(StepKind::Final, "done");
    store.append_turn(sid, {"hello", "", "done", "DOC_QA", "t-1", 5}, trace);
    tid = "t-1";
    EXPECT_THROW(store.append_turn(sid, {"again", "", "x", "DOC_QA", "t-1", 6}, trace), ConfigError);
  }
  SessionStore again(dir.str());
  const auto s = again.get_session(sid);
  ASSERT_EQ(s.turns.size(), 1u);
  EXPECT_EQ(s.turns[0].answer, "done");
  EXPECT_EQ(again.get_trace(tid).steps().size(), 2u);
  EXPECT_THROW(again.get_trace("t-missing"), NotFound);
}

TEST(Trace, JsonRoundTrip) {
  TurnTrace t("t-9", "s-9");
  t.add(StepKind::Intent, "{\"intent\":\"DOC_QA\"}", "router");
  t.add(StepKind::Retrieval, "[]", "qa");
  t.add(StepKind::Final, "answer");
  const auto back = TurnTrace::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
  EXPECT_EQ(parse_step_kind("MODEL_OUTPUT"), StepKind::ModelOutput);
}

// All three intents in one offline session.
TEST(EndToEnd, ThreeIntentSession) {
  const auto started = std::chrono::steady_clock::now();
  Rig rig;
  const auto sid = rig.store.create_session();
  const auto a = rig.copilot->handle_turn(sid, "What is multi-touch attribution?");
  const auto b = rig.copilot->handle_turn(sid, "How many heads of the departments are older than 56?");
  const auto c = rig.copilot->handle_turn(sid, "Explain this attribution row", std::string(testsupport::kTable2Csv));
  EXPECT_EQ(a.intent.kind, IntentKind::DocQa);
  EXPECT_EQ(b.intent.kind, IntentKind::SqlQuery);
  EXPECT_EQ(c.intent.kind, IntentKind::TableExplain);
  for (const auto* r : {&a, &b, &c}) {
    EXPECT_FALSE(r->error.has_value());
    const auto trace = rig.store.get_trace(r->trace_id);
    EXPECT_EQ(trace.steps().front().kind, StepKind::Intent);
    EXPECT_EQ(trace.steps().back().kind, StepKind::Final);
    expect_monotonic(trace);
  }
  EXPECT_NE(c.answer.find(testsupport::kTable2Explanation), std::string::npos);
  EXPECT_EQ(rig.store.get_session(sid).turns.size(), 3u);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(), 5.0);
}
