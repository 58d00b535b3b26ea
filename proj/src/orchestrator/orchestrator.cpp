#include "copilot/orchestrator/orchestrator.hpp"

#include <cstdio>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"
#include "copilot/sql/parser.hpp"
#include "copilot/table/attribution.hpp"

namespace copilot::orchestrator {

using nlohmann::json;

std::string to_string(IntentKind k) {
  switch (k) {
    case IntentKind::DocQa: return "DOC_QA";
    case IntentKind::SqlQuery: return "SQL_QUERY";
    case IntentKind::TableExplain: return "TABLE_EXPLAIN";
  }
  return "DOC_QA";
}

std::string to_string(IntentSource s) {
  return s == IntentSource::Model ? "MODEL" : "HEURISTIC_FALLBACK";
}

std::string build_router_prompt(const std::string& user_text) {
  return "Classify the user's message for a marketing analytics copilot. Reply with exactly one "
         "token and nothing else:\n"
         "DOC_QA - a question answered from marketing documents and concepts\n"
         "SQL_QUERY - a request that needs a SQL query over the database\n"
         "TABLE_EXPLAIN - a request to explain rows of an attribution table\n\n"
         "Message: " +
         user_text + "\nIntent:";
}

IntentKind heuristic_intent(const std::string& user_text) {
  for (const char* kw : {"schema", "table", "how many", "average", "total"}) {
    if (text::contains_icase(user_text, kw)) return IntentKind::SqlQuery;
  }
  return IntentKind::DocQa;
}

namespace {

std::optional<IntentKind> parse_intent_token(const std::string& reply) {
  std::string_view s = text::trim(reply);
  while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`' || s.back() == '.')) {
    s.remove_suffix(1);
  }
  const std::string upper = text::to_upper(s);
  for (auto k : {IntentKind::DocQa, IntentKind::SqlQuery, IntentKind::TableExplain}) {
    if (upper == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string apology(const TurnError& e) {
  return "Sorry, I could not complete that request (" + e.code + "): " + e.message;
}

std::string attachment_ref(const std::string& csv) {
  return "csv:" + text::hex64(text::fnv1a64(csv));
}

}  // namespace

Intent classify_intent(const std::string& user_text, bool attachment_present,
                       gateway::Gateway& gateway, const std::string& endpoint,
                       RouterExchange* exchange) {
  if (attachment_present) return {IntentKind::TableExplain, IntentSource::HeuristicFallback};
  const std::string prompt = build_router_prompt(user_text);
  if (exchange != nullptr) exchange->prompt = prompt;
  try {
    std::string reply = gateway.complete(endpoint, prompt);
    if (exchange != nullptr) exchange->reply = reply;
    if (auto k = parse_intent_token(reply)) return {*k, IntentSource::Model};
  } catch (const std::exception& e) {
    if (exchange != nullptr) exchange->error = e.what();
  }
  return {heuristic_intent(user_text), IntentSource::HeuristicFallback};
}

Copilot::Copilot(gateway::Gateway& gateway, SessionStore& store, CopilotConfig config,
                 KnowledgeSource knowledge)
    : gateway_(gateway), store_(store), config_(std::move(config)), knowledge_(std::move(knowledge)) {}

std::string Copilot::complete_traced(const std::string& endpoint, const std::string& prompt,
                                     const std::string& label, TurnTrace& trace) {
  trace.add(StepKind::Prompt, prompt, label);
  std::string out = gateway_.complete(endpoint, prompt);
  trace.add(StepKind::ModelOutput, out, label);
  return out;
}

std::string Copilot::doc_qa(const std::string& text, TurnTrace& trace) {
  qa::QaAgent agent(knowledge_ ? knowledge_() : nullptr, gateway_);
  const auto context = agent.retrieve_context(text, config_.k);
  json hits = json::array();
  for (const auto& c : context) hits.push_back({{"chunk_id", c.chunk_id}, {"score", c.score}});
  trace.add(StepKind::Retrieval, hits.dump(), "qa");
  return complete_traced(config_.qa_endpoint, qa::build_qa_prompt(text, context), "qa", trace);
}

std::string Copilot::sql_query(const std::string& text, TurnTrace& trace) {
  sql::SqlExample target{text, config_.sql_context, ""};
  const std::size_t shots = std::min(config_.n_shots, config_.sql_shots.size());
  const std::string prompt = sql::build_fewshot_prompt(target, config_.sql_shots, shots);
  const std::string raw = complete_traced(config_.sql_endpoint, prompt, "sql", trace);
  const std::string query = sql::extract_sql(raw);
  try {
    const auto normalized = sql::render_sql(sql::normalize_ast(sql::parse_sql(query)));
    trace.add(StepKind::Verdict, "VALID: " + normalized, "sql");
    return "```sql\n" + query + "\n```\nThe query parses under the supported SQL subset.";
  } catch (const sql::ParseError& e) {
    trace.add(StepKind::Verdict, std::string("ParseError: ") + e.what(), "sql");
    return "The generated SQL is not valid under the supported SQL subset (" +
           std::string(e.what()) + "):\n" + query;
  }
}

std::string Copilot::table_explain(const std::string& text, const std::optional<std::string>& csv,
                                   TurnTrace& trace) {
  std::vector<table::AttributionRow> rows;
  if (csv) {
    rows = table::parse_csv_rows(*csv);
  } else if (auto pos = text::to_lower(text).find("model name,"); pos != std::string::npos) {
    rows = table::parse_csv_rows(std::string_view(text).substr(pos));
  }
  if (rows.empty()) {
    throw Error("MissingTable",
                "attach a CSV table with the header \"model name,channel,absolute change,...\"");
  }

  json verdict = json::array();
  std::vector<std::string> explanations;
  for (const auto& row : rows) {
    const auto ex = table::ground_truth_explanation(row);
    json factors = json::array();
    for (const auto& [name, score] : row.factor_scores) {
      factors.push_back(
          {{"name", name}, {"score", score}, {"class", table::to_string(table::classify_factor(score))}});
    }
    const auto dir = table::direction_of(row.absolute_change);
    verdict.push_back({{"header", ex.header},
                       {"absolute_change", row.absolute_change},
                       {"direction", dir == table::Direction::Decrease   ? "DECREASE"
                                     : dir == table::Direction::Increase ? "INCREASE"
                                                                         : "NO_CHANGE"},
                       {"factors", std::move(factors)},
                       {"explanation", ex.full_text}});
    explanations.push_back(ex.full_text);
  }
  trace.add(StepKind::Verdict, verdict.dump(), "table");
  const std::string oracle = text::join(explanations, "\n");
  if (config_.rephrase_endpoint.empty()) return oracle;
  return complete_traced(config_.rephrase_endpoint,
                         "Rephrase the following explanation for a marketing manager. Keep every "
                         "number and every factor classification unchanged.\n\n" +
                             oracle,
                         "rephrase", trace);
}

TurnResult Copilot::handle_turn(const std::string& session_id, const std::string& user_text,
                                const std::optional<std::string>& attachment_csv) {
  auto session_lock = store_.lock_session(session_id);

  TurnResult result;
  result.trace_id = text::random_id("t-");
  TurnTrace trace(result.trace_id, session_id);

  RouterExchange exchange;
  result.intent = classify_intent(user_text, attachment_csv.has_value(), gateway_,
                                  config_.router_endpoint, &exchange);
  trace.add(StepKind::Intent,
            json{{"intent", to_string(result.intent.kind)},
                 {"source", to_string(result.intent.source)}}
                .dump(),
            "router");
  if (!exchange.prompt.empty()) {
    trace.add(StepKind::Prompt, exchange.prompt, "router");
    if (exchange.reply) {
      trace.add(StepKind::ModelOutput, *exchange.reply, "router");
    } else {
      trace.add(StepKind::ModelOutput, "gateway error: " + exchange.error, "router");
    }
  }

  try {
    switch (result.intent.kind) {
      case IntentKind::DocQa: result.answer = doc_qa(user_text, trace); break;
      case IntentKind::SqlQuery: result.answer = sql_query(user_text, trace); break;
      case IntentKind::TableExplain:
        result.answer = table_explain(user_text, attachment_csv, trace);
        break;
    }
    trace.add(StepKind::Final, result.answer);
  } catch (const GatewayError& e) {
    result.error = TurnError{e.kind(), e.what(), e.endpoint()};
  } catch (const Error& e) {
    result.error = TurnError{e.kind(), e.what(), {}};
  } catch (const std::exception& e) {
    result.error = TurnError{"InternalError", e.what(), {}};
  }
  if (result.error) {
    result.answer = apology(*result.error);
    trace.add(StepKind::Final,
              json{{"answer", result.answer},
                   {"error", {{"code", result.error->code}, {"message", result.error->message}}}}
                  .dump());
  }

  SessionTurn turn;
  turn.user_text = user_text;
  if (attachment_csv) turn.attachment_ref = attachment_ref(*attachment_csv);
  turn.answer = result.answer;
  turn.intent = to_string(result.intent.kind);
  turn.trace_id = result.trace_id;
  turn.timestamp_ms = text::now_millis();
  store_.append_turn(session_id, std::move(turn), trace);
  return result;
}

}  // namespace copilot::orchestrator
