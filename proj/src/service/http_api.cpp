#include "copilot/service/http_api.hpp"

#include <set>

#include <httplib.h>

#include "copilot/common/error.hpp"

namespace copilot::service {

using nlohmann::json;

int status_for(const std::exception& e) {
  if (dynamic_cast<const json::exception*>(&e) != nullptr) return 400;
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return 500;
  static const std::set<std::string> kBadInput = {
      "ConfigError", "DatasetError", "ParseError", "LeakageError", "EmptyDocument",
      "RangeError",  "CorpusError",  "MissingTable"};
  static const std::set<std::string> kUpstream = {"GatewayError", "ReplayMiss",    "ScriptGap",
                                                  "FetchError",   "ProviderError", "EvalError"};
  const std::string& kind = err->kind();
  if (kBadInput.count(kind)) return 400;
  if (kind == "NotFound") return 404;
  if (kind == "IndexBusy" || kind == "IndexNotBuilt") return 409;
  if (kUpstream.count(kind)) return 502;
  return 500;
}

json error_body(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* ce = dynamic_cast<const Error*>(&e)) {
    err["code"] = ce->kind();
  } else if (dynamic_cast<const json::exception*>(&e) != nullptr) {
    err["code"] = "BadRequest";
  } else {
    err["code"] = "InternalError";
  }
  if (const auto* ge = dynamic_cast<const GatewayError*>(&e)) err["endpoint"] = ge->endpoint();
  return {{"error", std::move(err)}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw ConfigError("request body must be a JSON object");
  return body;
}

template <typename T>
std::optional<T> optional_field(const json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  return body[key].get<T>();
}

json turn_json(const orchestrator::TurnResult& r) {
  json out = {{"answer", r.answer},
              {"intent", orchestrator::to_string(r.intent.kind)},
              {"intent_source", orchestrator::to_string(r.intent.source)},
              {"trace_id", r.trace_id}};
  if (r.error) {
    out["error"] = {{"code", r.error->code}, {"message", r.error->message}};
    if (!r.error->endpoint.empty()) out["error"]["endpoint"] = r.error->endpoint;
  }
  return out;
}

bool is_gateway_failure(const orchestrator::TurnResult& r) {
  if (!r.error) return false;
  const auto& c = r.error->code;
  return c == "GatewayError" || c == "ReplayMiss" || c == "ScriptGap";
}

}  // namespace

struct HttpApi::Impl {
  CopilotService& service;
  httplib::Server server;

  explicit Impl(CopilotService& s) : service(s) { routes(); }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const std::exception& e) {
        send_json(res, status_for(e), error_body(e));
      }
    };
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Post("/v1/corpus/documents", guarded([this](const auto& req, auto& res) {
      const json body = parse_body(req);
      ingest::Origin origin;
      if (body.contains("url")) {
        origin = ingest::Origin::url(body["url"].get<std::string>());
      } else if (body.contains("text")) {
        origin = ingest::Origin::text(body["text"].get<std::string>(), body.value("label", "inline"));
      } else {
        throw ConfigError("body needs \"url\" or \"text\"");
      }
      const auto r = service.add_document(origin);
      send_json(res, 200, {{"doc_id", r.doc_id}, {"chunks", r.chunks}});
    }));

    server.Post("/v1/index/rebuild", guarded([this](const auto&, auto& res) {
      const auto r = service.rebuild_index();
      send_json(res, 200, {{"dimension", r.dimension}, {"count", r.count}});
    }));

    server.Post("/v1/sessions", guarded([this](const auto&, auto& res) {
      send_json(res, 200, {{"session_id", service.create_session()}});
    }));

    server.Post(R"(/v1/sessions/([^/]+)/messages)", guarded([this](const auto& req, auto& res) {
      const json body = parse_body(req);
      if (!body.contains("text") || !body["text"].is_string()) {
        throw ConfigError("body needs a string \"text\"");
      }
      const auto attachment = optional_field<std::string>(body, "attachment_csv");
      const auto r = service.post_message(req.matches[1], body["text"].get<std::string>(), attachment);
      send_json(res, is_gateway_failure(r) ? 502 : 200, turn_json(r));
    }));

    server.Get(R"(/v1/sessions/([^/]+))", guarded([this](const auto& req, auto& res) {
      send_json(res, 200, orchestrator::to_json(service.get_session(req.matches[1])));
    }));

    server.Get(R"(/v1/traces/([^/]+))", guarded([this](const auto& req, auto& res) {
      send_json(res, 200, service.get_trace(req.matches[1]).to_json());
    }));

    server.Post("/v1/eval/sql", guarded([this](const auto& req, auto& res) {
      const json body = parse_body(req);
      SqlEvalRequest r;
      r.dataset = body.value("dataset", "");
      r.model = body.value("model", "");
      r.shots = optional_field<std::size_t>(body, "shots");
      r.eval_count = optional_field<std::size_t>(body, "eval_count");
      r.seed = optional_field<std::uint64_t>(body, "seed");
      r.lenient = body.value("lenient", false);
      send_json(res, 200, to_json(service.eval_sql(r)));
    }));

    server.Post("/v1/eval/table", guarded([this](const auto& req, auto& res) {
      const json body = parse_body(req);
      TableEvalRequest r;
      r.n = body.value("n", std::size_t{1000});
      r.seed = optional_field<std::uint64_t>(body, "seed");
      r.model = body.value("model", "");
      r.format = table::parse_row_format(body.value("format", "csv"));
      r.strict = body.value("strict", false);
      send_json(res, 200, to_json(service.eval_table(r)));
    }));

    server.Post("/v1/eval/qa", guarded([this](const auto& req, auto& res) {
      const json body = parse_body(req);
      QaEvalRequest r;
      if (body.contains("questions") && body["questions"].is_string()) {
        r.questions_path = body["questions"].get<std::string>();
      } else if (body.contains("questions")) {
        for (const auto& q : body["questions"]) {
          r.questions.push_back({q.at("id").is_string() ? q.at("id").get<std::string>() : q.at("id").dump(),
                                 q.at("question").get<std::string>(),
                                 q.at("reference").get<std::string>()});
        }
      } else {
        throw ConfigError("body needs \"questions\"");
      }
      r.candidates = body.value("candidates", std::vector<std::string>{});
      r.judge = body.value("judge", "");
      r.k = optional_field<std::size_t>(body, "k");
      send_json(res, 200, to_json(service.eval_qa(r)));
    }));

    server.Get(R"(/v1/reports/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto report = service.get_report(req.matches[1]);
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
      if (format == "records") {
        res.set_content(emit_report(report, ReportSink::MachineRecords), "application/x-ndjson");
      } else if (format == "table") {
        res.set_content(emit_report(report, ReportSink::HumanTable), "text/plain");
      } else {
        send_json(res, 200, to_json(report));
      }
    }));
  }
};

HttpApi::HttpApi(CopilotService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpApi::~HttpApi() = default;

int HttpApi::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw ConfigError("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpApi::serve() { impl_->server.listen_after_bind(); }

void HttpApi::stop() { impl_->server.stop(); }

}  // namespace copilot::service
