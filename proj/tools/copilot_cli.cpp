// Command-line front end. Every service route has a subcommand; `serve`
// runs the HTTP API.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"
#include "copilot/ingest/corpus.hpp"
#include "copilot/service/copilot_service.hpp"
#include "copilot/service/http_api.hpp"

namespace {

using namespace copilot;
using nlohmann::json;

struct Globals {
  std::string config_path;
  std::string gateway_mode;
  std::string transcript;
  std::string data_dir;
};

service::ServiceConfig load_config(const Globals& g) {
  auto cfg = g.config_path.empty() ? service::ServiceConfig::defaults()
                                   : service::ServiceConfig::load(g.config_path);
  if (!g.data_dir.empty()) {
    cfg.data_dir = g.data_dir;
    cfg.corpus_dir = g.data_dir + "/corpus";
    cfg.index_path = g.data_dir + "/index/index.vidx";
  }
  if (!g.gateway_mode.empty()) cfg.gateway_mode = g.gateway_mode;
  if (!g.transcript.empty()) cfg.transcript_path = g.transcript;
  cfg.validate();
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> out;
  for (const auto& line : text::split(text::read_file(path), '\n')) {
    const auto t = text::trim(line);
    if (!t.empty() && t.front() != '#') out.emplace_back(t);
  }
  return out;
}

void print_report(const service::RunReport& r, bool records) {
  std::cout << service::emit_report(
      r, records ? service::ReportSink::MachineRecords : service::ReportSink::HumanTable);
}

volatile std::sig_atomic_t g_stop = 0;
service::HttpApi* g_api = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Marketing analytics copilot engine"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--gateway-mode", g.gateway_mode, "live | record | replay");
  app.add_option("--transcript", g.transcript, "transcript file for record/replay");
  app.add_option("--data-dir", g.data_dir, "data directory (corpus, index, sessions, reports)");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Fetch, chunk and store documents");
  std::string urls_file;
  std::vector<std::string> text_files;
  std::size_t max_tokens = 500;
  std::string corpus_dir;
  std::size_t parallelism = 4;
  ingest_cmd->add_option("--urls", urls_file, "file with one URL per line");
  ingest_cmd->add_option("--text", text_files, "plain text or HTML files");
  ingest_cmd->add_option("--max-tokens", max_tokens, "chunk size bound")->check(CLI::PositiveNumber);
  ingest_cmd->add_option("--corpus", corpus_dir, "corpus directory");
  ingest_cmd->add_option("--parallelism", parallelism, "concurrent fetches")->check(CLI::PositiveNumber);

  auto* add_cmd = app.add_subcommand("corpus-add", "Add one document through the service");
  std::string add_url, add_text_file;
  add_cmd->add_option("--url", add_url);
  add_cmd->add_option("--text-file", add_text_file);

  auto* rebuild_cmd = app.add_subcommand("index-rebuild", "Embed the corpus and write the index");

  auto* ask_cmd = app.add_subcommand("ask", "Answer a question from the knowledge base");
  std::string question, model;
  std::size_t k = 0;
  ask_cmd->add_option("--question", question)->required();
  ask_cmd->add_option("--k", k, "chunks to retrieve (config default when 0)");
  ask_cmd->add_option("--model", model, "answering endpoint (default: routing.qa)");

  auto* sql_cmd = app.add_subcommand("eval-sql", "Few-shot SQL generation accuracy");
  service::SqlEvalRequest sql_req;
  std::size_t shots = 0, eval_count = 0;
  std::uint64_t seed = 0;
  bool records = false;
  sql_cmd->add_option("--dataset", sql_req.dataset)->required();
  sql_cmd->add_option("--model", sql_req.model)->required();
  auto* shots_opt = sql_cmd->add_option("--shots", shots);
  auto* count_opt = sql_cmd->add_option("--eval-count", eval_count);
  auto* sql_seed_opt = sql_cmd->add_option("--seed", seed);
  sql_cmd->add_flag("--lenient", sql_req.lenient);
  sql_cmd->add_flag("--records", records, "print machine records instead of the table");

  auto* table_cmd = app.add_subcommand("eval-table", "Attribution explanation accuracy");
  service::TableEvalRequest table_req;
  std::string format = "csv";
  table_cmd->add_option("--n", table_req.n)->check(CLI::PositiveNumber);
  auto* table_seed_opt = table_cmd->add_option("--seed", seed);
  table_cmd->add_option("--model", table_req.model)->required();
  table_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "list", "text"}));
  table_cmd->add_flag("--strict", table_req.strict);
  table_cmd->add_flag("--records", records);

  auto* judge_cmd = app.add_subcommand("judge", "LLM-judged QA evaluation");
  service::QaEvalRequest qa_req;
  std::string candidates;
  judge_cmd->add_option("--questions", qa_req.questions_path)->required();
  judge_cmd->add_option("--candidates", candidates, "comma-separated endpoints")->required();
  judge_cmd->add_option("--judge", qa_req.judge)->required();
  auto* judge_k_opt = judge_cmd->add_option("--k", k);
  judge_cmd->add_flag("--records", records);

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  std::string host;
  int port = -1;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);

  auto* session_new_cmd = app.add_subcommand("session-new", "Create a chat session");
  auto* message_cmd = app.add_subcommand("message", "Send one chat turn");
  std::string session_id, message_text, attachment_file;
  message_cmd->add_option("--session", session_id)->required();
  message_cmd->add_option("--text", message_text)->required();
  message_cmd->add_option("--attachment", attachment_file, "CSV attribution table");

  auto* session_show_cmd = app.add_subcommand("session-show", "Print a session's history");
  session_show_cmd->add_option("--session", session_id)->required();
  auto* trace_show_cmd = app.add_subcommand("trace-show", "Print a turn trace");
  std::string trace_id;
  trace_show_cmd->add_option("--trace", trace_id)->required();
  auto* report_show_cmd = app.add_subcommand("report-show", "Print a stored report");
  std::string run_id;
  report_show_cmd->add_option("--run", run_id)->required();
  report_show_cmd->add_flag("--records", records);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) {
      auto cfg = load_config(g);
      std::vector<ingest::Origin> origins;
      if (!urls_file.empty()) {
        for (auto& u : read_lines(urls_file)) origins.push_back(ingest::Origin::url(u));
      }
      for (const auto& f : text_files) origins.push_back(ingest::Origin::text(text::read_file(f), f));
      ingest::CorpusStore store(corpus_dir.empty() ? cfg.corpus_dir : corpus_dir);
      ingest::IngestOptions opt;
      opt.max_chunk_tokens = max_tokens;
      opt.parallelism = parallelism;
      const auto stats = ingest::ingest_corpus(origins, store, opt);
      std::cout << "documents: " << stats.documents << "\nchunks: " << stats.chunks
                << "\nerrors: " << stats.errors.size() << "\n";
      for (const auto& e : stats.errors) {
        std::cout << "  " << e.origin << ": " << e.kind << ": " << e.message << "\n";
      }
      return stats.errors.empty() ? 0 : 2;
    }

    service::CopilotService svc(load_config(g));

    if (add_cmd->parsed()) {
      if (add_url.empty() == add_text_file.empty()) throw ConfigError("give exactly one of --url, --text-file");
      const auto origin = add_url.empty()
                              ? ingest::Origin::text(text::read_file(add_text_file), add_text_file)
                              : ingest::Origin::url(add_url);
      const auto r = svc.add_document(origin);
      std::cout << json{{"doc_id", r.doc_id}, {"chunks", r.chunks}}.dump() << "\n";
    } else if (rebuild_cmd->parsed()) {
      const auto r = svc.rebuild_index();
      std::cout << json{{"dimension", r.dimension}, {"count", r.count}}.dump() << "\n";
    } else if (ask_cmd->parsed()) {
      qa::QaAgent agent(svc.knowledge(), svc.gateway());
      const auto ans = agent.answer_question(question, k == 0 ? svc.config().k : k, model.empty() ? svc.config().qa_endpoint : model);
      std::cout << ans.answer << "\n\n";
      std::cout << "rank  score     chunk\n";
      for (std::size_t i = 0; i < ans.citations.size(); ++i) {
        char line[64];
        std::snprintf(line, sizeof line, "%-4zu  %.6f  ", i + 1, ans.citations[i].score);
        std::cout << line << ans.citations[i].chunk_id << "\n";
      }
    } else if (sql_cmd->parsed()) {
      if (shots_opt->count()) sql_req.shots = shots;
      if (count_opt->count()) sql_req.eval_count = eval_count;
      if (sql_seed_opt->count()) sql_req.seed = seed;
      print_report(svc.eval_sql(sql_req), records);
    } else if (table_cmd->parsed()) {
      if (table_seed_opt->count()) table_req.seed = seed;
      table_req.format = table::parse_row_format(format);
      print_report(svc.eval_table(table_req), records);
    } else if (judge_cmd->parsed()) {
      for (auto& c : text::split(candidates, ',')) {
        if (!text::trim(c).empty()) qa_req.candidates.emplace_back(text::trim(c));
      }
      if (judge_k_opt->count()) qa_req.k = k;
      const auto r = svc.eval_qa(qa_req);
      if (records) {
        print_report(r, true);
      } else {
        std::cout << r.summary.value("table", "") << "\n";
        print_report(r, false);
      }
    } else if (serve_cmd->parsed()) {
      service::HttpApi api(svc);
      const int bound = api.bind(host.empty() ? svc.config().listen_host : host,
                                 port < 0 ? svc.config().listen_port : port);
      std::cerr << "listening on " << (host.empty() ? svc.config().listen_host : host) << ":"
                << bound << "\n";
      g_api = &api;
      std::signal(SIGINT, [](int) {
        g_stop = 1;
        if (g_api != nullptr) g_api->stop();
      });
      std::signal(SIGTERM, [](int) {
        g_stop = 1;
        if (g_api != nullptr) g_api->stop();
      });
      api.serve();
      g_api = nullptr;
    } else if (session_new_cmd->parsed()) {
      std::cout << json{{"session_id", svc.create_session()}}.dump() << "\n";
    } else if (message_cmd->parsed()) {
      std::optional<std::string> attachment;
      if (!attachment_file.empty()) attachment = text::read_file(attachment_file);
      const auto r = svc.post_message(session_id, message_text, attachment);
      json out = {{"answer", r.answer},
                  {"intent", orchestrator::to_string(r.intent.kind)},
                  {"intent_source", orchestrator::to_string(r.intent.source)},
                  {"trace_id", r.trace_id}};
      if (r.error) out["error"] = {{"code", r.error->code}, {"message", r.error->message}};
      std::cout << out.dump(2) << "\n";
    } else if (session_show_cmd->parsed()) {
      std::cout << orchestrator::to_json(svc.get_session(session_id)).dump(2) << "\n";
    } else if (trace_show_cmd->parsed()) {
      std::cout << svc.get_trace(trace_id).to_json().dump(2) << "\n";
    } else if (report_show_cmd->parsed()) {
      print_report(svc.get_report(run_id), records);
    }
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
