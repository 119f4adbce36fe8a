#include "simgrag/llm.hpp"

#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "http.hpp"
#include "json.hpp"

namespace simgrag {

using nlohmann::json;

namespace {

std::string indent(std::size_t n) { return std::string(n, ' '); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const std::string& path) {
  auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw std::runtime_error(path + ": invalid JSON");
  return j;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string prompt_fingerprint(const std::vector<ChatMessage>& messages) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& m : messages) {
    mix(m.role);
    mix("\x1f");
    mix(m.content);
    mix("\x1e");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) {
  json request = {{"model", config_.model}, {"temperature", options.temperature}, {"max_tokens", options.max_tokens}};
  request["messages"] = json::array();
  for (const auto& m : messages) request["messages"].push_back({{"role", m.role}, {"content", m.content}});

  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 << std::min(attempt, 6)));
    const auto res = detail::post_json(config_.base_url, config_.path, headers, request.dump(), config_.timeout_seconds);
    if (res.status == 0) {
      last_error = "request failed: " + res.error;
      continue;
    }
    if (res.status >= 500 || res.status == 429) {
      last_error = "HTTP " + std::to_string(res.status);
      continue;
    }
    if (res.status != 200) throw ChatError("chat endpoint returned HTTP " + std::to_string(res.status));

    const auto body = json::parse(res.body, nullptr, false);
    if (body.is_discarded()) throw ChatError("chat endpoint returned invalid JSON");
    const json* message = nullptr;
    if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
      message = &body["choices"][0]["message"];
    } else if (body.contains("message")) {
      message = &body["message"];
    }
    if (!message || !message->is_object() || !message->contains("content") || !(*message)["content"].is_string()) {
      throw ChatError("chat response carries no message content");
    }
    return (*message)["content"].get<std::string>();
  }
  throw ChatError("chat endpoint failed after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

void ScriptedChatClient::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("fingerprint") || !j.contains("response") ||
        !j["fingerprint"].is_string() || !j["response"].is_string()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected {\"fingerprint\", \"response\"}");
    }
    add(j["fingerprint"].get<std::string>(), j["response"].get<std::string>());
  }
}

void ScriptedChatClient::add(std::string fingerprint, std::string response) {
  responses_[std::move(fingerprint)] = std::move(response);
}

std::string ScriptedChatClient::complete(const std::vector<ChatMessage>& messages, const ChatOptions&) {
  ++calls_;
  const auto fp = prompt_fingerprint(messages);
  auto it = responses_.find(fp);
  if (it == responses_.end()) throw ChatError("no scripted response for prompt fingerprint " + fp);
  return it->second;
}

std::string RecordingChatClient::complete(const std::vector<ChatMessage>& messages, const ChatOptions& options) {
  auto response = inner_.complete(messages, options);
  std::lock_guard lock(mu_);
  recorded_[prompt_fingerprint(messages)] = response;
  return response;
}

std::map<std::string, std::string> RecordingChatClient::recorded() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

void RecordingChatClient::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [fp, response] : recorded()) out << json{{"fingerprint", fp}, {"response", response}}.dump() << "\n";
}

std::string render_evidence_block(const std::vector<std::vector<std::array<std::string, 3>>>& graphs,
                                  QuoteStyle style, std::size_t base) {
  std::ostringstream out;
  out << "{\n";
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    out << indent(base + 4) << "\"graph [" << i + 1 << "]\": [\n";
    for (const auto& t : graphs[i]) out << indent(base + 8) << format_triple(t[0], t[1], t[2], style) << ",\n";
    out << indent(base + 4) << (i + 1 < graphs.size() ? "],\n" : "]\n");
  }
  out << indent(base) << "}";
  return out.str();
}

std::string render_pattern_shot(std::size_t number, const PatternShot& shot, QuoteStyle style) {
  std::vector<PatternTriple> triples;
  for (const auto& t : shot.triples) triples.push_back({PatternTerm(t[0]), PatternTerm(t[1]), PatternTerm(t[2])});
  const PatternGraph p(std::move(triples), shot.divided);
  return std::to_string(number) + ". query: \"" + shot.query + "\"\n" + indent(4) + "output: " +
         render_pattern_block(p, style, 4);
}

std::string render_answer_shot(std::size_t number, const AnswerShot& shot, QuoteStyle style) {
  return std::to_string(number) + ". query: \"" + shot.query + "\"\n" + indent(4) + "evidences: " +
         render_evidence_block(shot.evidences, style, 4) + "\n" + indent(4) + "answer: " + shot.answer;
}

PromptTemplate::PromptTemplate(std::string name, PromptKind kind, QuoteStyle quote, std::string instructions,
                               std::string task)
    : name_(std::move(name)),
      kind_(kind),
      quote_(quote),
      instructions_(std::move(instructions)),
      task_(std::move(task)) {}

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  const auto j = parse_json_file(path);
  try {
    const auto kind = j.at("kind").get<std::string>();
    const auto quote = j.value("quote", std::string("double"));
    if (kind != "pattern" && kind != "answer") throw TemplateError(path + ": kind must be 'pattern' or 'answer'");
    if (quote != "double" && quote != "single") throw TemplateError(path + ": quote must be 'double' or 'single'");
    return PromptTemplate(j.value("name", std::filesystem::path(path).stem().string()),
                          kind == "pattern" ? PromptKind::kPattern : PromptKind::kAnswer,
                          quote == "double" ? QuoteStyle::kDouble : QuoteStyle::kSingle,
                          j.at("instructions").get<std::string>(), j.at("task").get<std::string>());
  } catch (const json::exception& e) {
    throw TemplateError(path + ": " + e.what());
  }
}

void PromptTemplate::load_shots(const std::string& path) {
  const auto j = parse_json_file(path);
  if (!j.is_array()) throw TemplateError(path + ": shot bank must be a JSON array");
  try {
    for (const auto& s : j) {
      if (kind_ == PromptKind::kPattern) {
        add_shot(PatternShot{s.at("query").get<std::string>(), s.value("divided", std::vector<std::string>{}),
                             s.at("triples").get<std::vector<std::array<std::string, 3>>>()});
      } else {
        add_shot(AnswerShot{s.at("query").get<std::string>(),
                            s.at("evidences").get<std::vector<std::vector<std::array<std::string, 3>>>>(),
                            s.at("answer").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    throw TemplateError(path + ": " + e.what());
  }
}

void PromptTemplate::add_shot(const PatternShot& shot) {
  if (kind_ != PromptKind::kPattern) throw TemplateError("pattern shot added to answer template " + name_);
  render_pattern_shot(1, shot, quote_);  // validates the triples up front
  pattern_shots_.push_back(shot);
}

void PromptTemplate::add_shot(const AnswerShot& shot) {
  if (kind_ != PromptKind::kAnswer) throw TemplateError("answer shot added to pattern template " + name_);
  answer_shots_.push_back(shot);
}

void PromptTemplate::set_shot_count(std::size_t count) {
  if (count > bank_size()) {
    throw TemplateError("shot count " + std::to_string(count) + " exceeds bank size " + std::to_string(bank_size()));
  }
  shot_count_ = count;
}

std::string PromptTemplate::render(std::string_view query, const std::string* evidences) const {
  std::string out = instructions_;
  if (shot_count_ > 0) {
    out += "\n\nExamples)\n";
    for (std::size_t i = 0; i < shot_count_; ++i) {
      if (i > 0) out += "\n";
      out += kind_ == PromptKind::kPattern ? render_pattern_shot(i + 1, pattern_shots_[i], quote_)
                                           : render_answer_shot(i + 1, answer_shots_[i], quote_);
    }
  }
  out += "\n\nYour task)\n";

  // Single left-to-right pass so placeholder-like text inside the query or
  // evidences is never substituted again.
  bool used_evidences = false;
  std::size_t pos = 0;
  while (pos < task_.size()) {
    const auto open = task_.find("{{", pos);
    if (open == std::string::npos) {
      out.append(task_, pos, std::string::npos);
      break;
    }
    out.append(task_, pos, open - pos);
    const auto close = task_.find("}}", open + 2);
    if (close == std::string::npos) throw TemplateError("unterminated placeholder in template " + name_);
    const auto key = task_.substr(open + 2, close - open - 2);
    if (key == "QUERY") {
      out += query;
    } else if (key == "RETRIEVED SUBGRAPHS") {
      if (!evidences) throw TemplateError("template " + name_ + " needs {{RETRIEVED SUBGRAPHS}} but none were given");
      out += *evidences;
      used_evidences = true;
    } else {
      throw TemplateError("unresolved placeholder {{" + key + "}} in template " + name_);
    }
    pos = close + 2;
  }
  if (evidences && !used_evidences) throw TemplateError("template " + name_ + " has no {{RETRIEVED SUBGRAPHS}} slot");
  return out;
}

PatternGeneration query_to_pattern(std::string_view query, const PromptTemplate& tmpl, ChatClient& client,
                                   const PatternRequestOptions& options) {
  if (tmpl.kind() != PromptKind::kPattern) throw TemplateError("template " + tmpl.name() + " is not a pattern template");
  const auto prompt = tmpl.render(query);
  std::vector<ChatMessage> messages{{"user", prompt}};
  std::vector<std::string> raw;
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= options.max_retries; ++attempt) {
    raw.push_back(client.complete(messages, options.chat));
    try {
      return PatternGeneration{parse_llm_pattern(raw.back()), attempt, raw, prompt};
    } catch (const PatternError& e) {
      last_error = e.what();
    }
    messages.push_back({"assistant", raw.back()});
    messages.push_back({"user", "The previous output could not be used (" + last_error +
                                    "). Return the segmented query and triples strictly in the required format."});
  }
  throw PatternGenerationError("no valid pattern after " + std::to_string(options.max_retries + 1) +
                                   " attempts: " + last_error,
                               std::move(raw));
}

std::vector<std::vector<std::array<std::string, 3>>> evidence_triples(const std::vector<ScoredSubgraph>& subgraphs,
                                                                      const KnowledgeGraph& g) {
  std::vector<std::vector<std::array<std::string, 3>>> out;
  for (const auto& s : subgraphs) {
    auto& graph = out.emplace_back();
    for (const auto t : s.mapping.edge_map) {
      const auto& tr = g.triples()[t];
      graph.push_back({std::string(g.entity_label(tr.head)), std::string(g.relation_label(tr.relation)),
                       std::string(g.entity_label(tr.tail))});
    }
  }
  return out;
}

AnswerGeneration generate_answer(std::string_view query, const std::vector<ScoredSubgraph>& subgraphs,
                                 const KnowledgeGraph& g, const PromptTemplate& tmpl, ChatClient& client,
                                 const AnswerRequestOptions& options) {
  if (tmpl.kind() != PromptKind::kAnswer) throw TemplateError("template " + tmpl.name() + " is not an answer template");
  if (subgraphs.empty() && !options.allow_empty_evidence) {
    throw std::invalid_argument("generate_answer needs at least one subgraph");
  }
  const auto block = render_evidence_block(evidence_triples(subgraphs, g), tmpl.quote(), 0);
  AnswerGeneration out;
  out.prompt = tmpl.render(query, &block);
  try {
    out.answer = client.complete({{"user", out.prompt}}, options.chat);
  } catch (const GenerationError&) {
    throw;
  } catch (const ChatError& e) {
    throw GenerationError(std::string("answer generation failed: ") + e.what());
  }
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kSupported: return "Supported";
    case Verdict::kRefuted: return "Refuted";
    case Verdict::kUnknown: return "Unknown";
  }
  return "Unknown";
}

Verdict extract_verdict(std::string_view answer) {
  Verdict v = Verdict::kUnknown;
  for (std::size_t i = 0; i < answer.size(); ++i) {
    if (i > 0 && is_word_char(answer[i - 1])) continue;
    auto word_at = [&](std::string_view w) {
      return answer.substr(i, w.size()) == w && (i + w.size() == answer.size() || !is_word_char(answer[i + w.size()]));
    };
    if (word_at("True")) v = Verdict::kSupported;
    else if (word_at("False")) v = Verdict::kRefuted;
  }
  return v;
}

bool answer_contains(std::string_view answer, const std::vector<std::string>& gold) {
  const auto hay = lower(answer);
  for (const auto& g : gold) {
    if (!g.empty() && hay.find(lower(g)) != std::string::npos) return true;
  }
  return false;
}

}  // namespace simgrag
