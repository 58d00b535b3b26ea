#include "copilot/service/config.hpp"

#include <filesystem>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

extern char** environ;

namespace copilot::service {

using nlohmann::json;

std::string env_name_for(const std::string& key_path) {
  std::string out = "COPILOT_";
  for (char c : text::to_upper(key_path)) out.push_back(c == '.' ? '_' : c);
  return out;
}

std::map<std::string, std::string> ServiceConfig::current_env() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

json ServiceConfig::to_json() const {
  json eps = json::array();
  for (const auto& e : endpoints) {
    eps.push_back({{"name", e.name},
                   {"kind", e.kind},
                   {"base_url", e.base_url},
                   {"model", e.model},
                   {"auth_env", e.auth_env},
                   {"timeout_ms", e.timeout_ms},
                   {"max_retries", e.max_retries},
                   {"max_concurrency", e.max_concurrency},
                   {"rules", e.rules}});
  }
  return {
      {"listen", {{"host", listen_host}, {"port", listen_port}}},
      {"data_dir", data_dir},
      {"corpus_dir", corpus_dir},
      {"index_path", index_path},
      {"embedding",
       {{"provider", embedding_provider},
        {"dimension", embedding_dimension},
        {"url", embedding_url},
        {"model", embedding_model},
        {"auth_env", embedding_auth_env}}},
      {"gateway", {{"mode", gateway_mode}, {"transcript", transcript_path}}},
      {"endpoints", std::move(eps)},
      {"routing",
       {{"router", router_endpoint},
        {"qa", qa_endpoint},
        {"sql", sql_endpoint},
        {"rephrase", rephrase_endpoint}}},
      {"defaults",
       {{"k", k},
        {"max_chunk_tokens", max_chunk_tokens},
        {"n_shots", n_shots},
        {"threshold", threshold},
        {"eval_count", eval_count},
        {"seed", seed},
        {"workers", workers}}},
      {"sql", {{"context", sql_context}, {"shots", sql_shots_path}}},
  };
}

namespace {

void apply_env(json& node, const std::string& path, const std::map<std::string, std::string>& env) {
  if (node.is_object()) {
    for (auto& [key, child] : node.items()) {
      apply_env(child, path.empty() ? key : path + "." + key, env);
    }
    return;
  }
  if (node.is_array()) return;
  auto it = env.find(env_name_for(path));
  if (it == env.end()) return;
  const std::string& raw = it->second;
  try {
    if (node.is_number_unsigned()) {
      node = std::stoull(raw);
    } else if (node.is_number_integer()) {
      node = std::stoll(raw);
    } else if (node.is_number_float()) {
      node = std::stod(raw);
    } else if (node.is_boolean()) {
      node = raw == "1" || text::to_lower(raw) == "true";
    } else {
      node = raw;
    }
  } catch (const std::exception&) {
    throw ConfigError(env_name_for(path) + "=\"" + raw + "\" is not a valid value for " + path);
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key ") + key + ": " + e.what());
  }
}

ServiceConfig from_merged(const json& d) {
  ServiceConfig c;
  c.listen_host = get<std::string>(d["listen"], "host");
  c.listen_port = get<int>(d["listen"], "port");
  c.data_dir = get<std::string>(d, "data_dir");
  c.corpus_dir = get<std::string>(d, "corpus_dir");
  c.index_path = get<std::string>(d, "index_path");
  const auto& emb = d["embedding"];
  c.embedding_provider = get<std::string>(emb, "provider");
  c.embedding_dimension = get<std::size_t>(emb, "dimension");
  c.embedding_url = get<std::string>(emb, "url");
  c.embedding_model = get<std::string>(emb, "model");
  c.embedding_auth_env = get<std::string>(emb, "auth_env");
  c.gateway_mode = get<std::string>(d["gateway"], "mode");
  c.transcript_path = get<std::string>(d["gateway"], "transcript");
  for (const auto& e : d["endpoints"]) {
    EndpointConfig ep;
    ep.name = get<std::string>(e, "name");
    ep.kind = e.value("kind", ep.kind);
    ep.base_url = e.value("base_url", "");
    ep.model = e.value("model", "");
    ep.auth_env = e.value("auth_env", "");
    ep.timeout_ms = e.value("timeout_ms", ep.timeout_ms);
    ep.max_retries = e.value("max_retries", ep.max_retries);
    ep.max_concurrency = e.value("max_concurrency", ep.max_concurrency);
    ep.rules = e.value("rules", json::array());
    c.endpoints.push_back(std::move(ep));
  }
  const auto& r = d["routing"];
  c.router_endpoint = get<std::string>(r, "router");
  c.qa_endpoint = get<std::string>(r, "qa");
  c.sql_endpoint = get<std::string>(r, "sql");
  c.rephrase_endpoint = get<std::string>(r, "rephrase");
  const auto& df = d["defaults"];
  c.k = get<std::size_t>(df, "k");
  c.max_chunk_tokens = get<std::size_t>(df, "max_chunk_tokens");
  c.n_shots = get<std::size_t>(df, "n_shots");
  c.threshold = get<int>(df, "threshold");
  c.eval_count = get<std::size_t>(df, "eval_count");
  c.seed = get<std::uint64_t>(df, "seed");
  c.workers = get<std::size_t>(df, "workers");
  c.sql_context = get<std::string>(d["sql"], "context");
  c.sql_shots_path = get<std::string>(d["sql"], "shots");

  namespace fs = std::filesystem;
  if (c.corpus_dir.empty()) c.corpus_dir = (fs::path(c.data_dir) / "corpus").string();
  if (c.index_path.empty()) c.index_path = (fs::path(c.data_dir) / "index" / "index.vidx").string();
  return c;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& doc, const std::map<std::string, std::string>& env) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  json merged = ServiceConfig{}.to_json();
  merged.merge_patch(doc);
  apply_env(merged, "", env);
  ServiceConfig c = from_merged(merged);
  c.validate();
  return c;
}

ServiceConfig ServiceConfig::load(const std::string& path, const std::map<std::string, std::string>& env) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return from_json(doc, env);
}

ServiceConfig ServiceConfig::defaults(const std::map<std::string, std::string>& env) {
  return from_json(json::object(), env);
}

void ServiceConfig::validate() const {
  auto range = [](const char* name, long long v, long long lo, long long hi) {
    if (v < lo || v > hi) {
      throw ConfigError(std::string(name) + " = " + std::to_string(v) + " is outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  };
  range("defaults.k", static_cast<long long>(k), 1, 1000);
  range("defaults.max_chunk_tokens", static_cast<long long>(max_chunk_tokens), 1, 100000);
  range("defaults.n_shots", static_cast<long long>(n_shots), 0, 100);
  range("defaults.threshold", threshold, 0, 100);
  range("defaults.eval_count", static_cast<long long>(eval_count), 1, 10000000);
  range("defaults.workers", static_cast<long long>(workers), 1, 256);
  range("listen.port", listen_port, 0, 65535);
  range("embedding.dimension", static_cast<long long>(embedding_dimension), 1, 65536);
  gateway::parse_gateway_mode(gateway_mode);
  if (embedding_provider != "mock" && embedding_provider != "remote") {
    throw ConfigError("embedding.provider must be \"mock\" or \"remote\"");
  }
  if (embedding_provider == "remote" && embedding_url.empty()) {
    throw ConfigError("embedding.url is required for the remote provider");
  }
  std::map<std::string, int> seen;
  for (const auto& e : endpoints) {
    if (e.name.empty()) throw ConfigError("endpoint with empty name");
    if (++seen[e.name] > 1) throw ConfigError("duplicate endpoint name \"" + e.name + "\"");
    if (e.kind != "http" && e.kind != "scripted") {
      throw ConfigError("endpoint " + e.name + ": kind must be \"http\" or \"scripted\"");
    }
    if (e.kind == "http" && e.base_url.empty()) {
      throw ConfigError("endpoint " + e.name + ": base_url is required");
    }
    if (e.timeout_ms <= 0) throw ConfigError("endpoint " + e.name + ": timeout_ms must be > 0");
    if (e.max_concurrency == 0) throw ConfigError("endpoint " + e.name + ": max_concurrency must be > 0");
  }
}

}  // namespace copilot::service
