#pragma once
// Label embeddings and exact L2 nearest-neighbor search.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace simgrag {

using EmbeddingVector = std::vector<float>;

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Euclidean distance. Differences are taken in float, squares summed in double.
double l2_distance(std::span<const float> a, std::span<const float> b);

// Maps label text to the text actually embedded. Identity unless configured.
struct LabelNormalizer {
  bool underscores_to_spaces = false;

  std::string operator()(std::string_view label) const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  // One vector per input, same order. Throws EmbeddingError on failure.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;

  EmbeddingVector embed_one(const std::string& text) const;
};

// Deterministic seeded provider for tests and offline runs. Each text is a
// normalized mix of a whole-string hash vector and per-token hash vectors, so
// labels that share words land closer together than unrelated labels.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::size_t dim, std::uint64_t seed = 0);

  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

 private:
  void accumulate(std::uint64_t key, float weight, std::span<float> out) const;

  std::size_t dim_;
  std::uint64_t seed_;
};

// Explicit text -> vector table. Unknown text is an error.
class DictionaryEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit DictionaryEmbeddingProvider(std::map<std::string, EmbeddingVector> table);

  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

 private:
  std::map<std::string, EmbeddingVector, std::less<>> table_;
  std::size_t dim_ = 0;
};

struct HttpEmbeddingConfig {
  std::string base_url = "http://127.0.0.1:11434";
  std::string path = "/v1/embeddings";
  std::string model = "nomic-embed-text";
  std::string api_key;
  std::size_t dim = 768;
  std::size_t batch_size = 64;
  int max_retries = 3;
  int timeout_seconds = 60;
};

// POSTs {"model", "input": [..]} and reads one float array per input from
// either an OpenAI-style {"data": [{"embedding": [...]}]} or an
// {"embeddings": [[...]]} response.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingConfig config);

  std::size_t dim() const override { return config_.dim; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override;

 private:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;

  HttpEmbeddingConfig config_;
};

struct Neighbor {
  std::uint32_t id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

// Row-major matrix of label vectors; row i belongs to labels()[i], which
// matches id i of the label table it was built from.
class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::size_t dim, std::vector<std::string> labels, std::vector<float> matrix);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::span<const float> vector(std::uint32_t id) const;
  std::span<const float> matrix() const { return matrix_; }

  // Exact linear scan. min(k, size()) results ordered by (distance, id).
  std::vector<Neighbor> top_k(std::span<const float> query, std::size_t k) const;
  double distance(std::span<const float> query, std::uint32_t id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<float> matrix_;
};

struct BuildOptions {
  LabelNormalizer normalizer;
  std::size_t batch_size = 256;
  // When non-empty, vectors are read from / written back to this cache file.
  std::string cache_path;
};

struct BuildStats {
  std::size_t cache_hits = 0;
  std::size_t provider_calls = 0;
  std::size_t embedded = 0;
};

VectorIndex build_index(std::span<const std::string> labels, const EmbeddingProvider& provider,
                        const BuildOptions& options = {}, BuildStats* stats = nullptr);

// Cache file: "SGEM", u32 dim, u64 count, then per record u32 byte length,
// label bytes, dim f32. All integers and floats little-endian.
void save_cache(const std::string& path, std::size_t dim, std::span<const std::string> labels,
                std::span<const float> matrix);
struct EmbeddingCache {
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<float> matrix;
};
EmbeddingCache load_cache(const std::string& path);

}  // namespace simgrag
