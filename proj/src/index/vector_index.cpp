#include "copilot/index/vector_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::index {

namespace {

constexpr char kMagic[4] = {'V', 'I', 'D', 'X'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n) {
      throw IndexFormatError(std::string("truncated index file while reading ") + what);
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

VectorIndex::VectorIndex(std::uint32_t dimension, std::string provider_tag)
    : dimension_(dimension), provider_tag_(std::move(provider_tag)) {
  if (dimension_ == 0) throw ConfigError("index dimension must be positive");
  if (provider_tag_.empty()) throw ConfigError("index provider tag must be non-empty");
}

void VectorIndex::add(EmbeddingRecord record) {
  if (record.vector.dimension() != dimension_) {
    throw DimensionError("record " + record.chunk_id + " has dimension " +
                         std::to_string(record.vector.dimension()) + ", index has " +
                         std::to_string(dimension_));
  }
  if (ids_.count(record.chunk_id)) throw ConfigError("duplicate chunk id: " + record.chunk_id);
  double sq = 0.0;
  for (float c : record.vector.components()) sq += static_cast<double>(c) * c;
  if (sq == 0.0) throw DegenerateVector("record " + record.chunk_id + " has zero norm");
  ids_.insert(record.chunk_id);
  norms_.push_back(std::sqrt(sq));
  records_.push_back(std::move(record));
}

std::vector<ScoredChunk> VectorIndex::top_k(const EmbeddingVector& query, std::size_t k) const {
  if (k == 0) throw ConfigError("k must be positive");
  if (query.dimension() != dimension_) {
    throw DimensionError("query dimension " + std::to_string(query.dimension()) +
                         " does not match index dimension " + std::to_string(dimension_));
  }
  if (records_.empty()) return {};

  const auto& q = query.components();
  double qq = 0.0;
  for (float c : q) qq += static_cast<double>(c) * c;
  if (qq == 0.0) throw DegenerateVector("zero-norm query");
  const double qnorm = std::sqrt(qq);

  std::vector<ScoredChunk> scored;
  scored.reserve(records_.size());
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& v = records_[r].vector.components();
    double dot = 0.0;
    for (std::size_t i = 0; i < dimension_; ++i) dot += static_cast<double>(q[i]) * v[i];
    scored.push_back({records_[r].chunk_id, std::clamp(dot / (qnorm * norms_[r]), -1.0, 1.0)});
  }
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    [](const ScoredChunk& a, const ScoredChunk& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.chunk_id < b.chunk_id;
                    });
  scored.resize(n);
  return scored;
}

bool VectorIndex::operator==(const VectorIndex& other) const {
  if (dimension_ != other.dimension_ || provider_tag_ != other.provider_tag_ ||
      records_.size() != other.records_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].chunk_id != other.records_[i].chunk_id) return false;
    if (!records_[i].vector.bit_equal(other.records_[i].vector)) return false;
  }
  return true;
}

std::string meta_path_for(const std::string& index_path) {
  std::filesystem::path p(index_path);
  p.replace_extension(".meta");
  if (p.string() == index_path) p = index_path + ".meta";
  return p.string();
}

void save_index(const VectorIndex& index, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kIndexFormatVersion);
  put_u32(out, index.dimension());
  put_u32(out, static_cast<std::uint32_t>(index.size()));
  for (const auto& rec : index.records()) {
    put_u32(out, static_cast<std::uint32_t>(rec.chunk_id.size()));
    out.append(rec.chunk_id);
    for (float c : rec.vector.components()) put_u32(out, std::bit_cast<std::uint32_t>(c));
  }
  text::write_file_atomic(path, out);
  text::write_file_atomic(meta_path_for(path), "provider_tag=" + index.provider_tag() +
                                                   "\nbuilt_at=" +
                                                   text::iso8601_utc(text::now_millis()) + "\n");
}

VectorIndex load_index(const std::string& path) {
  std::string data;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexFormatError("cannot open index file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    data = ss.str();
  }
  std::string provider_tag;
  {
    std::ifstream meta(meta_path_for(path));
    if (!meta) throw IndexFormatError("missing index sidecar: " + meta_path_for(path));
    std::string line;
    while (std::getline(meta, line)) {
      if (line.rfind("provider_tag=", 0) == 0) provider_tag = line.substr(13);
    }
    if (provider_tag.empty()) throw IndexFormatError("sidecar has no provider_tag");
  }

  Reader r(data);
  if (r.bytes(4, "magic") != std::string_view(kMagic, 4)) {
    throw IndexFormatError("bad magic in " + path);
  }
  const auto version = r.u32("version");
  if (version != kIndexFormatVersion) {
    throw IndexFormatError("unsupported index version " + std::to_string(version));
  }
  const auto dimension = r.u32("dimension");
  if (dimension == 0) throw IndexFormatError("index dimension is zero");
  const auto count = r.u32("record count");

  VectorIndex index(dimension, provider_tag);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto id_len = r.u32("id length");
    std::string id(r.bytes(id_len, "id"));
    std::vector<float> comps(dimension);
    for (auto& c : comps) c = std::bit_cast<float>(r.u32("component"));
    try {
      index.add({std::move(id), EmbeddingVector(std::move(comps))});
    } catch (const Error& e) {
      throw IndexFormatError(std::string("invalid record in index file: ") + e.what());
    }
  }
  if (!r.at_end()) throw IndexFormatError("trailing bytes after last record in " + path);
  return index;
}

}  // namespace copilot::index
