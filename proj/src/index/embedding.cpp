#include "copilot/index/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/http.hpp"
#include "copilot/common/text.hpp"
#include "copilot/ingest/tokenizer.hpp"

namespace copilot::index {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<float> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ProviderContractViolation("embedding has dimension 0");
  for (float c : components_) {
    if (!std::isfinite(c)) throw ProviderContractViolation("embedding has a non-finite component");
  }
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (float c : components_) sum += static_cast<double>(c) * static_cast<double>(c);
  return std::sqrt(sum);
}

bool EmbeddingVector::bit_equal(const EmbeddingVector& other) const {
  if (components_.size() != other.components_.size()) return false;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(components_[i]) !=
        std::bit_cast<std::uint32_t>(other.components_[i])) {
      return false;
    }
  }
  return true;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()));
  }
  const auto& x = a.components();
  const auto& y = b.components();
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = y[i];
    dot += xi * yi;
    xx += xi * xi;
    yy += yi * yi;
  }
  if (xx == 0.0 || yy == 0.0) throw DegenerateVector("zero-norm vector");
  return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

MockEmbedder::MockEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("mock embedder dimension must be positive");
}

std::string MockEmbedder::tag() const { return "mock-hash-" + std::to_string(dimension_); }

std::vector<EmbeddingVector> MockEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    std::vector<double> counts(dimension_, 0.0);
    const auto toks = ingest::tokens(t);
    if (toks.empty()) throw ProviderError("mock embedder: text has no tokens");
    for (const auto& tok : toks) {
      counts[text::fnv1a64(text::to_lower(tok)) % dimension_] += 1.0;
    }
    double sum = 0.0;
    for (double c : counts) sum += c * c;
    const double inv = 1.0 / std::sqrt(sum);
    std::vector<float> comps(dimension_);
    for (std::size_t i = 0; i < dimension_; ++i) comps[i] = static_cast<float>(counts[i] * inv);
    out.emplace_back(std::move(comps));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw ConfigError("remote embedder needs a url");
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
    const auto end = std::min(texts.size(), i + config_.batch_size);
    auto part = embed_batch({texts.begin() + static_cast<std::ptrdiff_t>(i),
                             texts.begin() + static_cast<std::ptrdiff_t>(end)});
    for (auto& v : part) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
  net::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (!token) throw ProviderError("credential env var not set: " + config_.auth_env);
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = json{{"input", texts}, {"model", config_.model}}.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
    const auto resp = net::http_post_json(config_.url, body, config_.timeout, headers);
    if (!resp.ok()) {
      last_error = resp.status == 0 ? resp.error : "HTTP status " + std::to_string(resp.status);
      continue;
    }
    json parsed;
    try {
      parsed = json::parse(resp.body);
    } catch (const json::exception& e) {
      throw ProviderContractViolation(std::string("embedding response is not JSON: ") + e.what());
    }
    std::vector<std::vector<float>> rows(texts.size());
    std::size_t filled = 0;
    try {
      if (parsed.contains("data")) {
        const auto& data = parsed.at("data");
        for (std::size_t i = 0; i < data.size(); ++i) {
          const auto idx = data[i].value("index", i);
          if (idx >= rows.size()) throw ProviderContractViolation("embedding index out of range");
          rows[idx] = data[i].at("embedding").get<std::vector<float>>();
          ++filled;
        }
      } else if (parsed.contains("embeddings")) {
        const auto& data = parsed.at("embeddings");
        for (std::size_t i = 0; i < data.size() && i < rows.size(); ++i) {
          rows[i] = data[i].get<std::vector<float>>();
          ++filled;
        }
      }
    } catch (const json::exception& e) {
      throw ProviderContractViolation(std::string("malformed embedding response: ") + e.what());
    }
    if (filled != texts.size()) {
      throw ProviderContractViolation("expected " + std::to_string(texts.size()) +
                                      " embeddings, got " + std::to_string(filled));
    }
    std::vector<EmbeddingVector> out;
    for (auto& r : rows) out.emplace_back(std::move(r));
    return out;
  }
  throw ProviderError("embedding provider failed after " + std::to_string(config_.max_retries) +
                      " retries: " + last_error);
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider) {
  for (const auto& t : texts) {
    if (t.empty()) throw ConfigError("cannot embed an empty string");
  }
  if (texts.empty()) return {};
  auto vectors = provider.embed(texts);
  if (vectors.size() != texts.size()) {
    throw ProviderContractViolation("provider returned " + std::to_string(vectors.size()) +
                                    " vectors for " + std::to_string(texts.size()) + " texts");
  }
  const std::size_t dim = vectors.front().dimension();
  for (const auto& v : vectors) {
    if (v.dimension() != dim) throw ProviderContractViolation("mixed dimensions in one batch");
  }
  return vectors;
}

}  // namespace copilot::index
