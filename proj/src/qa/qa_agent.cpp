#include "copilot/qa/qa_agent.hpp"

#include <sstream>

#include "copilot/common/error.hpp"

namespace copilot::qa {

const char* const kQaInstruction =
    "You are a marketing analytics assistant. Answer the question using only the provided "
    "context. If the context is insufficient to answer, say so.";

std::shared_ptr<const KnowledgeBase> build_knowledge_base(
    const std::vector<ingest::DocumentChunk>& chunks,
    std::shared_ptr<index::EmbeddingProvider> provider, std::size_t batch_size) {
  if (!provider) throw ConfigError("knowledge base needs an embedding provider");
  if (batch_size == 0) batch_size = 1;

  std::vector<index::EmbeddingVector> vectors;
  vectors.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); i += batch_size) {
    std::vector<std::string> texts;
    for (std::size_t j = i; j < std::min(chunks.size(), i + batch_size); ++j) {
      texts.push_back(chunks[j].text);
    }
    for (auto& v : index::embed_texts(texts, *provider)) vectors.push_back(std::move(v));
  }
  std::uint32_t dimension = 0;
  if (!vectors.empty()) {
    dimension = static_cast<std::uint32_t>(vectors.front().dimension());
  } else {
    dimension = static_cast<std::uint32_t>(
        index::embed_texts({"dimension probe"}, *provider).front().dimension());
  }

  auto kb = std::make_shared<KnowledgeBase>(
      KnowledgeBase{index::VectorIndex(dimension, provider->tag()), {}, provider});
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    kb->index.add({chunks[i].chunk_id, std::move(vectors[i])});
    kb->chunk_texts.emplace(chunks[i].chunk_id, chunks[i].text);
  }
  return kb;
}

std::string build_qa_prompt(const std::string& question, const std::vector<ContextChunk>& chunks) {
  std::ostringstream out;
  out << kQaInstruction << "\n\n";
  if (!chunks.empty()) {
    out << "Context:\n";
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      out << "[" << (i + 1) << "] " << chunks[i].chunk_id << "\n" << chunks[i].text << "\n\n";
    }
  }
  out << "Question: " << question << "\nAnswer:";
  return out.str();
}

QaAgent::QaAgent(std::shared_ptr<const KnowledgeBase> kb, gateway::Gateway& gateway)
    : kb_(std::move(kb)), gateway_(gateway) {}

std::vector<ContextChunk> QaAgent::retrieve_context(const std::string& question,
                                                    std::size_t k) const {
  if (k == 0) throw ConfigError("k must be positive");
  if (!kb_) throw IndexNotBuilt("no index has been built; ingest documents and rebuild the index");
  if (kb_->index.size() == 0) return {};
  if (kb_->provider->tag() != kb_->index.provider_tag()) {
    throw ConfigError("query embedder '" + kb_->provider->tag() + "' differs from index embedder '" +
                      kb_->index.provider_tag() + "'");
  }
  const auto query = index::embed_texts({question}, *kb_->provider).front();
  std::vector<ContextChunk> out;
  for (const auto& hit : kb_->index.top_k(query, k)) {
    const auto it = kb_->chunk_texts.find(hit.chunk_id);
    out.push_back({hit.chunk_id, it == kb_->chunk_texts.end() ? std::string() : it->second,
                   hit.score});
  }
  return out;
}

GroundedAnswer QaAgent::answer_question(const std::string& question, std::size_t k,
                                        const std::string& endpoint) const {
  GroundedAnswer result;
  result.question = question;
  const auto context = retrieve_context(question, k);
  result.prompt_used = build_qa_prompt(question, context);
  result.answer = gateway_.complete(endpoint, result.prompt_used);
  for (const auto& c : context) result.citations.push_back({c.chunk_id, c.score});
  return result;
}

}  // namespace copilot::qa
