#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "copilot/gateway/gateway.hpp"

namespace copilot::service {

struct EndpointConfig {
  std::string name;
  std::string kind = "http";  // "http" | "scripted"
  std::string base_url;
  std::string model;
  std::string auth_env;
  std::int64_t timeout_ms = 60000;
  int max_retries = 3;
  std::size_t max_concurrency = 4;
  nlohmann::json rules = nlohmann::json::array();  // scripted: [{substring|fingerprint|any, response}]
};

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;

  std::string data_dir = "data";
  std::string corpus_dir;  // default <data_dir>/corpus
  std::string index_path;  // default <data_dir>/index/index.vidx

  std::string embedding_provider = "mock";  // "mock" | "remote"
  std::size_t embedding_dimension = 64;
  std::string embedding_url;
  std::string embedding_model;
  std::string embedding_auth_env;

  std::string gateway_mode = "live";
  std::string transcript_path;

  std::vector<EndpointConfig> endpoints;
  std::string router_endpoint;
  std::string qa_endpoint;
  std::string sql_endpoint;
  std::string rephrase_endpoint;

  std::size_t k = 4;
  std::size_t max_chunk_tokens = 500;
  std::size_t n_shots = 5;
  int threshold = 5;
  std::size_t eval_count = 1000;
  std::uint64_t seed = 20240101;
  std::size_t workers = 4;

  std::string sql_context;
  std::string sql_shots_path;  // JSONL of question/context/answer; empty for none

  /// Parses the JSON document, applies environment overrides and validates.
  static ServiceConfig from_json(const nlohmann::json& doc,
                                 const std::map<std::string, std::string>& env = current_env());
  static ServiceConfig load(const std::string& path,
                            const std::map<std::string, std::string>& env = current_env());
  /// Defaults plus environment overrides.
  static ServiceConfig defaults(const std::map<std::string, std::string>& env = current_env());

  nlohmann::json to_json() const;

  /// Throws ConfigError for out-of-range numbers or an unknown mode/provider.
  void validate() const;

  static std::map<std::string, std::string> current_env();
};

/// Environment variable that overrides a key path: "defaults.k" ->
/// "COPILOT_DEFAULTS_K".
std::string env_name_for(const std::string& key_path);

}  // namespace copilot::service
