#include "copilot/gateway/gateway.hpp"

#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/http.hpp"
#include "copilot/common/text.hpp"

namespace copilot::gateway {

using nlohmann::json;

namespace {

std::string normalize_content(std::string_view content) {
  std::string out;
  out.reserve(content.size());
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (content[i] == '\r' && i + 1 < content.size() && content[i + 1] == '\n') continue;
    out.push_back(content[i]);
  }
  return std::string(text::trim(out));
}

}  // namespace

CompletionRequest CompletionRequest::from_prompt(std::string prompt, int max_output_tokens) {
  CompletionRequest req;
  req.messages.push_back({"user", std::move(prompt)});
  req.max_output_tokens = max_output_tokens;
  return req;
}

std::string CompletionRequest::flattened() const {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i) out.push_back('\n');
    out.append(messages[i].content);
  }
  return out;
}

std::string fingerprint(const std::string& endpoint_name, const CompletionRequest& req) {
  json msgs = json::array();
  for (const auto& m : req.messages) {
    msgs.push_back({text::to_lower(text::trim(m.role)), normalize_content(m.content)});
  }
  const std::string canonical =
      json{{"endpoint", endpoint_name}, {"messages", msgs}, {"max_tokens", req.max_output_tokens}}
          .dump();
  std::string reversed(canonical.rbegin(), canonical.rend());
  return "fp-" + text::hex64(text::fnv1a64(canonical)) + text::hex64(text::fnv1a64(reversed));
}

HttpChatBackend::HttpChatBackend(ModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.name.empty()) throw ConfigError("endpoint needs a name");
  if (endpoint_.base_url.empty()) throw ConfigError("endpoint " + endpoint_.name + " needs a base_url");
  if (endpoint_.timeout.count() <= 0) throw ConfigError("endpoint timeout must be positive");
  if (endpoint_.model.empty()) endpoint_.model = endpoint_.name;
}

std::string HttpChatBackend::complete(const CompletionRequest& req, const std::string&) {
  net::Headers headers;
  if (!endpoint_.auth_ref.empty()) {
    const char* token = std::getenv(endpoint_.auth_ref.c_str());
    if (!token) throw GatewayError(endpoint_.name, "credential env var not set: " + endpoint_.auth_ref);
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const std::string body = json{{"model", endpoint_.model},
                                {"messages", messages},
                                {"temperature", req.temperature},
                                {"max_tokens", req.max_output_tokens}}
                               .dump();

  std::string last_error;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(endpoint_.backoff_base * (1 << (attempt - 1)));
    const auto resp = net::http_post_json(endpoint_.base_url, body, endpoint_.timeout, headers);
    if (resp.status == 0) {
      last_error = resp.error;
      continue;
    }
    if (resp.status == 429 || resp.status >= 500) {
      last_error = "HTTP status " + std::to_string(resp.status);
      continue;
    }
    if (!resp.ok()) {
      throw GatewayError(endpoint_.name, "HTTP status " + std::to_string(resp.status) + ": " +
                                             resp.body.substr(0, 200));
    }
    try {
      const json parsed = json::parse(resp.body);
      return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw GatewayError(endpoint_.name, std::string("malformed completion response: ") + e.what());
    }
  }
  throw GatewayError(endpoint_.name, "failed after " + std::to_string(endpoint_.max_retries) +
                                         " retries: " + last_error);
}

ScriptRule ScriptRule::substring(std::string needle, std::string response) {
  ScriptRule r;
  r.matcher = Matcher::Substring;
  r.pattern = std::move(needle);
  r.response = std::move(response);
  return r;
}

ScriptRule ScriptRule::fingerprint(std::string fp, std::string response) {
  ScriptRule r;
  r.matcher = Matcher::Fingerprint;
  r.pattern = std::move(fp);
  r.response = std::move(response);
  return r;
}

ScriptRule ScriptRule::dynamic(Matcher matcher, std::string pattern,
                               std::function<std::string(const CompletionRequest&)> responder) {
  ScriptRule r;
  r.matcher = matcher;
  r.pattern = std::move(pattern);
  r.responder = std::move(responder);
  return r;
}

ScriptRule ScriptRule::fallback(std::string response) {
  ScriptRule r;
  r.matcher = Matcher::Any;
  r.response = std::move(response);
  return r;
}

ScriptedModel::ScriptedModel(std::vector<ScriptRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw ConfigError("scripted model needs at least one rule");
}

std::string ScriptedModel::complete(const CompletionRequest& req, const std::string& fp) {
  const std::string flat = req.flattened();
  for (const auto& rule : rules_) {
    bool hit = false;
    switch (rule.matcher) {
      case ScriptRule::Matcher::Substring:
        hit = flat.find(rule.pattern) != std::string::npos;
        break;
      case ScriptRule::Matcher::Fingerprint:
        hit = rule.pattern == fp;
        break;
      case ScriptRule::Matcher::Any:
        hit = true;
        break;
    }
    if (hit) return rule.responder ? rule.responder(req) : rule.response;
  }
  throw ScriptGap("no script rule matches request " + fp);
}

std::shared_ptr<ScriptedModel> scripted_model(std::vector<ScriptRule> rules) {
  return std::make_shared<ScriptedModel>(std::move(rules));
}

GatewayMode parse_gateway_mode(const std::string& s) {
  const auto m = text::to_lower(s);
  if (m == "live") return GatewayMode::Live;
  if (m == "record") return GatewayMode::Record;
  if (m == "replay") return GatewayMode::Replay;
  throw ConfigError("unknown gateway mode: " + s);
}

std::string to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::Live: return "live";
    case GatewayMode::Record: return "record";
    case GatewayMode::Replay: return "replay";
  }
  return "live";
}

Gateway::Gateway(GatewayMode mode, Transcript transcript)
    : mode_(mode), transcript_(std::move(transcript)) {}

void Gateway::register_endpoint(const std::string& name, std::shared_ptr<ModelBackend> backend,
                                std::size_t max_concurrency) {
  if (name.empty()) throw ConfigError("endpoint name must be non-empty");
  if (!backend) throw ConfigError("endpoint " + name + " has no backend");
  std::lock_guard lock(mutex_);
  if (slots_.count(name)) throw ConfigError("duplicate endpoint name: " + name);
  Slot slot;
  slot.backend = std::move(backend);
  slot.max_concurrency = max_concurrency == 0 ? 1 : max_concurrency;
  slots_.emplace(name, std::move(slot));
}

void Gateway::mark_degraded(const std::string& name, const std::string& reason) {
  std::lock_guard lock(mutex_);
  const auto it = slots_.find(name);
  if (it != slots_.end()) it->second.degraded = reason.empty() ? "degraded" : reason;
}

bool Gateway::has_endpoint(const std::string& name) const {
  std::lock_guard lock(mutex_);
  return slots_.count(name) > 0;
}

std::vector<std::string> Gateway::endpoint_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [name, _] : slots_) out.push_back(name);
  return out;
}

std::size_t Gateway::backend_calls(const std::string& endpoint) const {
  std::lock_guard lock(mutex_);
  const auto it = slots_.find(endpoint);
  return it == slots_.end() ? 0 : it->second.calls;
}

std::string Gateway::complete(const std::string& endpoint, const std::string& prompt) {
  return complete(endpoint, CompletionRequest::from_prompt(prompt));
}

std::string Gateway::complete(const std::string& endpoint, const CompletionRequest& req) {
  if (req.messages.empty() || text::trim(req.flattened()).empty()) {
    throw ConfigError("completion request has an empty prompt");
  }
  if (req.max_output_tokens <= 0) throw ConfigError("max_output_tokens must be positive");
  const std::string fp = fingerprint(endpoint, req);

  if (mode_ == GatewayMode::Replay) {
    if (auto hit = transcript_.find(fp)) return hit->response;
    throw ReplayMiss("no recorded response for " + endpoint + " request " + fp);
  }
  if (mode_ == GatewayMode::Record) {
    if (auto hit = transcript_.find(fp)) return hit->response;
  }
  const auto started = std::chrono::steady_clock::now();
  std::string response = call_backend(endpoint, req, fp);
  if (mode_ == GatewayMode::Record) {
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    transcript_.append({fp, endpoint, response, latency.count()});
  }
  return response;
}

std::string Gateway::call_backend(const std::string& endpoint, const CompletionRequest& req,
                                  const std::string& fp) {
  std::shared_ptr<ModelBackend> backend;
  {
    std::unique_lock lock(mutex_);
    const auto it = slots_.find(endpoint);
    if (it == slots_.end()) throw ConfigError("unknown model endpoint: " + endpoint);
    Slot& slot = it->second;
    if (!slot.degraded.empty()) throw GatewayError(endpoint, "endpoint degraded: " + slot.degraded);
    slot_free_.wait(lock, [&] { return slot.in_flight < slot.max_concurrency; });
    ++slot.in_flight;
    ++slot.calls;
    backend = slot.backend;
  }
  struct Release {
    Gateway* self;
    const std::string& name;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        --self->slots_.at(name).in_flight;
      }
      self->slot_free_.notify_all();
    }
  } release{this, endpoint};
  return backend->complete(req, fp);
}

}  // namespace copilot::gateway
