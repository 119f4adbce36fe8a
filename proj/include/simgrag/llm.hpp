#pragma once
// Chat clients, prompt templates and the two LLM steps: query-to-pattern
// alignment and subgraph-augmented answer generation.

#include <array>
#include <atomic>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simgrag/gsd.hpp"
#include "simgrag/kg_store.hpp"
#include "simgrag/pattern.hpp"

namespace simgrag {

class ChatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatOptions {
  double temperature = 0.0;
  int max_tokens = 1024;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Must be safe to call from several threads at once.
  virtual std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) = 0;
};

// 16 hex digits of FNV-1a over the role/content sequence. Decoding options
// are not part of the key.
std::string prompt_fingerprint(const std::vector<ChatMessage>& messages);

struct HttpChatConfig {
  std::string base_url = "http://127.0.0.1:11434";
  std::string path = "/v1/chat/completions";
  std::string model = "llama3:70b";
  std::string api_key;
  int max_retries = 3;
  int timeout_seconds = 300;
};

// POSTs {"model", "messages", "temperature", "max_tokens"} and accepts either
// {"choices": [{"message": {"content"}}]} or {"message": {"content"}}.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {}
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override;

 private:
  HttpChatConfig config_;
};

// Replays fixture responses keyed by prompt fingerprint; unknown prompts are
// an error. Fixture file: one {"fingerprint": ..., "response": ...} JSON
// object per line.
class ScriptedChatClient final : public ChatClient {
 public:
  ScriptedChatClient() = default;
  explicit ScriptedChatClient(const std::string& fixture_path) { load(fixture_path); }

  // Adds every line of a fixture file; malformed lines throw runtime_error.
  void load(const std::string& path);

  void add(std::string fingerprint, std::string response);
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override;
  std::size_t calls() const { return calls_.load(); }
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
  std::atomic<std::size_t> calls_{0};
};

// Forwards to another client and keeps fingerprint -> response pairs so a run
// can be frozen into a fixture file.
class RecordingChatClient final : public ChatClient {
 public:
  explicit RecordingChatClient(ChatClient& inner) : inner_(inner) {}
  std::string complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) override;
  void write(const std::string& path) const;
  std::map<std::string, std::string> recorded() const;

 private:
  ChatClient& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> recorded_;
};

enum class PromptKind { kPattern, kAnswer };

struct PatternShot {
  std::string query;
  std::vector<std::string> divided;
  std::vector<std::array<std::string, 3>> triples;
};

struct AnswerShot {
  std::string query;
  std::vector<std::vector<std::array<std::string, 3>>> evidences;
  std::string answer;
};

// Evidence block: "{", one "graph [i]" list per subgraph, "}". The closing
// brace sits at `indent` spaces, graph keys at indent+4, triples at indent+8.
std::string render_evidence_block(const std::vector<std::vector<std::array<std::string, 3>>>& graphs,
                                  QuoteStyle style, std::size_t indent);

std::string render_pattern_shot(std::size_t number, const PatternShot& shot, QuoteStyle style);
std::string render_answer_shot(std::size_t number, const AnswerShot& shot, QuoteStyle style);

class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, PromptKind kind, QuoteStyle quote, std::string instructions, std::string task);

  // {"name", "kind": "pattern"|"answer", "quote": "double"|"single",
  //  "instructions", "task"}
  static PromptTemplate from_file(const std::string& path);

  // Shot bank: JSON array of pattern shots ({"query", "divided", "triples"})
  // or answer shots ({"query", "evidences", "answer"}) matching the kind.
  void load_shots(const std::string& path);
  void add_shot(const PatternShot& shot);
  void add_shot(const AnswerShot& shot);
  void set_shot_count(std::size_t count);

  const std::string& name() const { return name_; }
  PromptKind kind() const { return kind_; }
  QuoteStyle quote() const { return quote_; }
  std::size_t shot_count() const { return shot_count_; }
  std::size_t bank_size() const { return pattern_shots_.size() + answer_shots_.size(); }

  // instructions, then (when shots are used) "Examples)" with the numbered
  // shots, then "Your task)" with {{QUERY}} and {{RETRIEVED SUBGRAPHS}}
  // substituted. Any placeholder left unresolved is a TemplateError.
  std::string render(std::string_view query, const std::string* evidences = nullptr) const;

 private:
  std::string name_;
  PromptKind kind_ = PromptKind::kPattern;
  QuoteStyle quote_ = QuoteStyle::kDouble;
  std::string instructions_;
  std::string task_;
  std::vector<PatternShot> pattern_shots_;
  std::vector<AnswerShot> answer_shots_;
  std::size_t shot_count_ = 0;
};

class PatternGenerationError : public std::runtime_error {
 public:
  PatternGenerationError(const std::string& what, std::vector<std::string> raw)
      : std::runtime_error(what), raw_outputs(std::move(raw)) {}
  std::vector<std::string> raw_outputs;
};

class GenerationError : public ChatError {
 public:
  using ChatError::ChatError;
};

struct PatternGeneration {
  PatternGraph pattern;
  std::size_t retries = 0;
  std::vector<std::string> raw_outputs;
  std::string prompt;
};

struct PatternRequestOptions {
  std::size_t max_retries = 2;
  ChatOptions chat;
};

PatternGeneration query_to_pattern(std::string_view query, const PromptTemplate& tmpl, ChatClient& client,
                                   const PatternRequestOptions& options = {});

// Triple labels of each subgraph, in retrieval rank order.
std::vector<std::vector<std::array<std::string, 3>>> evidence_triples(const std::vector<ScoredSubgraph>& subgraphs,
                                                                      const KnowledgeGraph& g);

struct AnswerGeneration {
  std::string prompt;
  std::string answer;
};

struct AnswerRequestOptions {
  bool allow_empty_evidence = false;
  ChatOptions chat;
};

AnswerGeneration generate_answer(std::string_view query, const std::vector<ScoredSubgraph>& subgraphs,
                                 const KnowledgeGraph& g, const PromptTemplate& tmpl, ChatClient& client,
                                 const AnswerRequestOptions& options = {});

enum class Verdict { kSupported, kRefuted, kUnknown };
std::string_view to_string(Verdict v);

// The last standalone "True" / "False" token decides.
Verdict extract_verdict(std::string_view answer);

// Case-insensitive containment of any gold answer.
bool answer_contains(std::string_view answer, const std::vector<std::string>& gold);

}  // namespace simgrag
