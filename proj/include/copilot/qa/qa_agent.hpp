#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "copilot/gateway/gateway.hpp"
#include "copilot/index/embedding.hpp"
#include "copilot/index/vector_index.hpp"
#include "copilot/ingest/chunker.hpp"

namespace copilot::qa {

inline constexpr std::size_t kDefaultTopK = 4;

/// Index plus the chunk texts it points at and the embedder that built it.
struct KnowledgeBase {
  index::VectorIndex index;
  std::unordered_map<std::string, std::string> chunk_texts;
  std::shared_ptr<index::EmbeddingProvider> provider;
};

/// Embeds every chunk and assembles a knowledge base. With no chunks the
/// index dimension comes from embedding a probe string.
std::shared_ptr<const KnowledgeBase> build_knowledge_base(
    const std::vector<ingest::DocumentChunk>& chunks,
    std::shared_ptr<index::EmbeddingProvider> provider, std::size_t batch_size = 256);

struct ContextChunk {
  std::string chunk_id;
  std::string text;
  double score = 0.0;
};

struct Citation {
  std::string chunk_id;
  double score = 0.0;
};

struct GroundedAnswer {
  std::string question;
  std::string answer;
  std::vector<Citation> citations;
  std::string prompt_used;
};

/// Instruction line at the top of every QA prompt.
extern const char* const kQaInstruction;

/// Instruction, then one numbered block per chunk headed by its chunk id (in
/// the given order), then the question.
std::string build_qa_prompt(const std::string& question, const std::vector<ContextChunk>& chunks);

class QaAgent {
 public:
  QaAgent(std::shared_ptr<const KnowledgeBase> kb, gateway::Gateway& gateway);

  /// Top-k chunks joined with their texts. Throws ConfigError for k == 0,
  /// IndexNotBuilt without a knowledge base.
  std::vector<ContextChunk> retrieve_context(const std::string& question, std::size_t k) const;

  GroundedAnswer answer_question(const std::string& question, std::size_t k,
                                 const std::string& endpoint) const;

 private:
  std::shared_ptr<const KnowledgeBase> kb_;
  gateway::Gateway& gateway_;
};

}  // namespace copilot::qa
