#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace copilot::index {

/// Fixed-dimension vector of finite 32-bit components.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  /// Throws ProviderContractViolation on an empty or non-finite vector.
  explicit EmbeddingVector(std::vector<float> components);

  std::size_t dimension() const { return components_.size(); }
  const std::vector<float>& components() const { return components_; }
  double norm() const;

  /// Component-wise bit equality.
  bool bit_equal(const EmbeddingVector& other) const;

 private:
  std::vector<float> components_;
};

/// dot(a,b) / (|a| |b|), accumulated in double and clamped to [-1, 1].
/// Throws DimensionError / DegenerateVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Names the model that produced the vectors; stored with every index.
  virtual std::string tag() const = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

/// Deterministic offline embedder: each lowercased token increments the
/// bucket `fnv1a64(token) % dimension`, and the count profile is scaled to
/// unit length. Identical texts always map to identical vectors.
class MockEmbedder final : public EmbeddingProvider {
 public:
  explicit MockEmbedder(std::size_t dimension = 64);

  std::string tag() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dimension_;
};

struct RemoteEmbedderConfig {
  std::string url;
  std::string model;
  std::string auth_env;  // env var holding a bearer token; empty for none
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::size_t batch_size = 64;
};

/// POSTs {"input": [...], "model": name} and accepts either
/// {"data": [{"embedding": [...], "index": i}, ...]} or
/// {"embeddings": [[...], ...]} in reply.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::string tag() const override { return "remote:" + config_.model; }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);

  RemoteEmbedderConfig config_;
};

/// Embeds `texts` and checks the provider contract: one vector per input and
/// one shared dimension. Throws ConfigError on an empty input string.
std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         EmbeddingProvider& provider);

}  // namespace copilot::index
