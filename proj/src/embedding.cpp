#include "simgrag/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "http.hpp"

namespace simgrag {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ull) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Lowercased runs of ASCII alphanumerics; any non-ASCII byte is kept as part
// of a token so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void check_finite(const EmbeddingVector& v, std::size_t dim, std::string_view text) {
  if (v.size() != dim) {
    throw EmbeddingError("embedding for '" + std::string(text) + "' has dim " + std::to_string(v.size()) +
                         ", expected " + std::to_string(dim));
  }
  for (float x : v) {
    if (!std::isfinite(x)) throw EmbeddingError("non-finite embedding value for '" + std::string(text) + "'");
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 24)};
  out.write(bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  write_u32(out, static_cast<std::uint32_t>(v));
  write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw EmbeddingError("truncated embedding cache");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  return lo | (hi << 32);
}

}  // namespace

double l2_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw EmbeddingError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i] - b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::string LabelNormalizer::operator()(std::string_view label) const {
  std::string out(label);
  if (underscores_to_spaces) std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

EmbeddingVector EmbeddingProvider::embed_one(const std::string& text) const {
  auto out = embed(std::span<const std::string>(&text, 1));
  if (out.size() != 1) throw EmbeddingError("provider returned " + std::to_string(out.size()) + " vectors for 1 input");
  return std::move(out.front());
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw EmbeddingError("embedding dim must be positive");
}

void HashEmbeddingProvider::accumulate(std::uint64_t key, float weight, std::span<float> out) const {
  std::uint64_t state = key ^ (seed_ * 0xD1B54A32D192ED03ull);
  for (auto& x : out) {
    // Top 24 bits mapped to [-1, 1).
    const auto bits = splitmix64(state) >> 40;
    x += weight * (static_cast<float>(bits) * (2.0f / 16777216.0f) - 1.0f);
  }
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    EmbeddingVector v(dim_, 0.0f);
    accumulate(fnv1a(text), 0.6f, v);
    const auto tokens = tokenize(text);
    if (!tokens.empty()) {
      const float w = 1.0f / std::sqrt(static_cast<float>(tokens.size()));
      for (const auto& tok : tokens) accumulate(fnv1a(tok, 0x84222325cbf29ce4ull), w, v);
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
      const float inv = static_cast<float>(1.0 / std::sqrt(norm));
      for (auto& x : v) x *= inv;
    }
    out.push_back(std::move(v));
  }
  return out;
}

DictionaryEmbeddingProvider::DictionaryEmbeddingProvider(std::map<std::string, EmbeddingVector> table) {
  for (auto& [text, vec] : table) {
    if (dim_ == 0) dim_ = vec.size();
    check_finite(vec, dim_, text);
    table_.emplace(text, std::move(vec));
  }
  if (dim_ == 0) throw EmbeddingError("dictionary provider needs at least one non-empty vector");
}

std::vector<EmbeddingVector> DictionaryEmbeddingProvider::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto it = table_.find(text);
    if (it == table_.end()) throw EmbeddingError("no embedding for '" + text + "'");
    out.push_back(it->second);
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig config) : config_(std::move(config)) {
  if (config_.dim == 0) throw EmbeddingError("embedding dim must be positive");
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
    const auto n = std::min(config_.batch_size, texts.size() - i);
    auto batch = embed_batch(texts.subspan(i, n));
    for (auto& v : batch) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  const nlohmann::json request = {{"model", config_.model}, {"input", texts}};
  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 6)));
    const auto res = detail::post_json(config_.base_url, config_.path, headers, request.dump(), config_.timeout_seconds);
    if (res.status == 0) {
      last_error = "request failed: " + res.error;
      continue;
    }
    if (res.status >= 500 || res.status == 429) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) throw EmbeddingError("embedding endpoint returned HTTP " + std::to_string(res.status));

    const auto body = nlohmann::json::parse(res.body, nullptr, false);
    if (body.is_discarded()) throw EmbeddingError("embedding endpoint returned invalid JSON");
    std::vector<EmbeddingVector> out;
    if (body.contains("data")) {
      for (const auto& item : body.at("data")) out.push_back(item.at("embedding").get<EmbeddingVector>());
    } else if (body.contains("embeddings")) {
      out = body.at("embeddings").get<std::vector<EmbeddingVector>>();
    } else {
      throw EmbeddingError("embedding response has neither 'data' nor 'embeddings'");
    }
    if (out.size() != texts.size()) {
      throw EmbeddingError("embedding endpoint returned " + std::to_string(out.size()) + " vectors for " +
                           std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < out.size(); ++i) check_finite(out[i], config_.dim, texts[i]);
    return out;
  }
  throw EmbeddingError("embedding endpoint failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

VectorIndex::VectorIndex(std::size_t dim, std::vector<std::string> labels, std::vector<float> matrix)
    : dim_(dim), labels_(std::move(labels)), matrix_(std::move(matrix)) {
  if (dim_ == 0) throw EmbeddingError("index dim must be positive");
  if (matrix_.size() != dim_ * labels_.size()) throw EmbeddingError("index matrix size does not match labels x dim");
}

std::span<const float> VectorIndex::vector(std::uint32_t id) const {
  if (id >= labels_.size()) throw EmbeddingError("index row " + std::to_string(id) + " out of range");
  return std::span<const float>(matrix_).subspan(static_cast<std::size_t>(id) * dim_, dim_);
}

double VectorIndex::distance(std::span<const float> query, std::uint32_t id) const {
  return l2_distance(query, vector(id));
}

std::vector<Neighbor> VectorIndex::top_k(std::span<const float> query, std::size_t k) const {
  if (k == 0) throw EmbeddingError("k must be positive");
  if (query.size() != dim_) {
    throw EmbeddingError("query dim " + std::to_string(query.size()) + " does not match index dim " +
                         std::to_string(dim_));
  }
  const auto n = labels_.size();
  std::vector<Neighbor> all(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    all[i] = {i, l2_distance(query, std::span<const float>(matrix_).subspan(std::size_t{i} * dim_, dim_))};
  }
  const auto by_distance = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  };
  const auto keep = std::min(k, n);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), by_distance);
  all.resize(keep);
  return all;
}

VectorIndex build_index(std::span<const std::string> labels, const EmbeddingProvider& provider,
                        const BuildOptions& options, BuildStats* stats) {
  if (labels.empty()) throw EmbeddingError("cannot build an index over zero labels");
  const std::size_t dim = provider.dim();
  BuildStats local;

  std::unordered_map<std::string, std::size_t> cached_rows;
  EmbeddingCache cache;
  if (!options.cache_path.empty() && std::filesystem::exists(options.cache_path)) {
    cache = load_cache(options.cache_path);
    if (cache.dim != dim) {
      throw EmbeddingError("cache dim " + std::to_string(cache.dim) + " does not match provider dim " +
                           std::to_string(dim));
    }
    for (std::size_t i = 0; i < cache.labels.size(); ++i) cached_rows.emplace(cache.labels[i], i);
  }

  std::vector<std::string> texts;
  texts.reserve(labels.size());
  for (const auto& l : labels) texts.push_back(options.normalizer(l));

  std::vector<float> matrix(labels.size() * dim);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto it = cached_rows.find(texts[i]); it != cached_rows.end()) {
      std::copy_n(cache.matrix.begin() + static_cast<std::ptrdiff_t>(it->second * dim), dim,
                  matrix.begin() + static_cast<std::ptrdiff_t>(i * dim));
      ++local.cache_hits;
    } else {
      pending.push_back(i);
    }
  }

  const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
  for (std::size_t start = 0; start < pending.size(); start += batch) {
    const auto n = std::min(batch, pending.size() - start);
    std::vector<std::string> chunk;
    chunk.reserve(n);
    for (std::size_t j = 0; j < n; ++j) chunk.push_back(texts[pending[start + j]]);
    auto vectors = provider.embed(chunk);
    ++local.provider_calls;
    if (vectors.size() != n) throw EmbeddingError("provider returned wrong number of vectors");
    for (std::size_t j = 0; j < n; ++j) {
      check_finite(vectors[j], dim, chunk[j]);
      std::copy(vectors[j].begin(), vectors[j].end(),
                matrix.begin() + static_cast<std::ptrdiff_t>(pending[start + j] * dim));
    }
    local.embedded += n;
  }

  if (!options.cache_path.empty() && (!pending.empty() || !std::filesystem::exists(options.cache_path))) {
    // Merge so one cache file can back several indexes (entities, relations,
    // types): rows already cached for other labels are kept.
    std::vector<std::string> out_labels;
    std::vector<float> out_matrix;
    std::unordered_map<std::string, std::size_t> written;
    auto emit = [&](const std::string& text, const float* row) {
      if (!written.emplace(text, out_labels.size()).second) return;
      out_labels.push_back(text);
      out_matrix.insert(out_matrix.end(), row, row + dim);
    };
    for (std::size_t i = 0; i < texts.size(); ++i) emit(texts[i], matrix.data() + i * dim);
    for (std::size_t i = 0; i < cache.labels.size(); ++i) emit(cache.labels[i], cache.matrix.data() + i * dim);
    save_cache(options.cache_path, dim, out_labels, out_matrix);
  }
  if (stats) *stats = local;
  return VectorIndex(dim, std::vector<std::string>(labels.begin(), labels.end()), std::move(matrix));
}

void save_cache(const std::string& path, std::size_t dim, std::span<const std::string> labels,
                std::span<const float> matrix) {
  if (matrix.size() != dim * labels.size()) throw EmbeddingError("cache matrix size does not match labels x dim");
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw EmbeddingError("cannot write embedding cache: " + tmp);
    out.write("SGEM", 4);
    write_u32(out, static_cast<std::uint32_t>(dim));
    write_u64(out, labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      write_u32(out, static_cast<std::uint32_t>(labels[i].size()));
      out.write(labels[i].data(), static_cast<std::streamsize>(labels[i].size()));
      for (std::size_t d = 0; d < dim; ++d) write_u32(out, std::bit_cast<std::uint32_t>(matrix[i * dim + d]));
    }
    if (!out) throw EmbeddingError("failed writing embedding cache: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

EmbeddingCache load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError("cannot open embedding cache: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SGEM", 4) != 0) throw EmbeddingError("bad embedding cache magic");
  EmbeddingCache cache;
  cache.dim = read_u32(in);
  const auto count = read_u64(in);
  cache.labels.reserve(count);
  cache.matrix.reserve(count * cache.dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = read_u32(in);
    std::string label(len, '\0');
    if (!in.read(label.data(), len)) throw EmbeddingError("truncated embedding cache");
    cache.labels.push_back(std::move(label));
    for (std::size_t d = 0; d < cache.dim; ++d) cache.matrix.push_back(std::bit_cast<float>(read_u32(in)));
  }
  return cache;
}

}  // namespace simgrag
