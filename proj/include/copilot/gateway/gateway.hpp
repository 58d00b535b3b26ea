#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "copilot/gateway/transcript.hpp"

namespace copilot::gateway {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_output_tokens = 1024;

  /// Single-turn request: one "user" message.
  static CompletionRequest from_prompt(std::string prompt, int max_output_tokens = 1024);

  /// All message contents joined by newlines; what substring rules see.
  std::string flattened() const;
};

/// Stable request hash over the endpoint name, the normalized message list
/// (lowercased roles, LF line endings, trimmed content) and max_output_tokens.
std::string fingerprint(const std::string& endpoint_name, const CompletionRequest& req);

/// Something that turns a request into text. Implementations must be safe
/// to call concurrently.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string complete(const CompletionRequest& req, const std::string& fingerprint) = 0;
};

struct ModelEndpoint {
  std::string name;
  std::string base_url;      // full chat-completions URL
  std::string model;         // remote model id; defaults to `name`
  std::string auth_ref;      // env var with a bearer token; empty for none
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{250};
  std::size_t max_concurrency = 4;
};

/// Chat-completions client: POSTs {"model", "messages", "temperature",
/// "max_tokens"} and returns choices[0].message.content. Transport errors,
/// 429 and 5xx are retried with exponential backoff; anything else, or
/// retry exhaustion, raises GatewayError.
class HttpChatBackend final : public ModelBackend {
 public:
  explicit HttpChatBackend(ModelEndpoint endpoint);
  std::string complete(const CompletionRequest& req, const std::string& fingerprint) override;

 private:
  ModelEndpoint endpoint_;
};

struct ScriptRule {
  enum class Matcher { Substring, Fingerprint, Any };

  Matcher matcher = Matcher::Substring;
  std::string pattern;
  std::string response;
  /// When set, produces the response instead of `response`.
  std::function<std::string(const CompletionRequest&)> responder;

  static ScriptRule substring(std::string needle, std::string response);
  static ScriptRule fingerprint(std::string fp, std::string response);
  static ScriptRule dynamic(Matcher matcher, std::string pattern,
                            std::function<std::string(const CompletionRequest&)> responder);
  static ScriptRule fallback(std::string response);
};

/// Deterministic model: the first matching rule answers; no match raises
/// ScriptGap.
class ScriptedModel final : public ModelBackend {
 public:
  explicit ScriptedModel(std::vector<ScriptRule> rules);
  std::string complete(const CompletionRequest& req, const std::string& fingerprint) override;

 private:
  std::vector<ScriptRule> rules_;
};

/// Throws ConfigError when `rules` is empty.
std::shared_ptr<ScriptedModel> scripted_model(std::vector<ScriptRule> rules);

enum class GatewayMode {
  Live,    // always call the backend
  Record,  // serve known fingerprints from the transcript, record new ones
  Replay,  // transcript only; a miss raises ReplayMiss
};

GatewayMode parse_gateway_mode(const std::string& s);
std::string to_string(GatewayMode mode);

/// The single seam through which prompts reach models.
class Gateway {
 public:
  explicit Gateway(GatewayMode mode = GatewayMode::Live, Transcript transcript = {});

  void register_endpoint(const std::string& name, std::shared_ptr<ModelBackend> backend,
                         std::size_t max_concurrency = 4);
  void mark_degraded(const std::string& name, const std::string& reason);
  bool has_endpoint(const std::string& name) const;
  std::vector<std::string> endpoint_names() const;

  std::string complete(const std::string& endpoint, const CompletionRequest& req);
  std::string complete(const std::string& endpoint, const std::string& prompt);

  /// Backend invocations actually made for `endpoint` (transcript hits excluded).
  std::size_t backend_calls(const std::string& endpoint) const;

  GatewayMode mode() const { return mode_; }
  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }

 private:
  struct Slot {
    std::shared_ptr<ModelBackend> backend;
    std::size_t max_concurrency = 4;
    std::size_t in_flight = 0;
    std::size_t calls = 0;
    std::string degraded;
  };

  std::string call_backend(const std::string& endpoint, const CompletionRequest& req,
                           const std::string& fp);

  GatewayMode mode_;
  Transcript transcript_;
  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  std::map<std::string, Slot> slots_;
};

}  // namespace copilot::gateway
