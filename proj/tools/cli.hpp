#pragma once
// Command-line front end. run_cli is the whole program minus process setup so
// tests can drive commands in-process.

#include <iosfwd>
#include <string>
#include <vector>

#include "simgrag/kg_store.hpp"
#include "simgrag/llm.hpp"
#include "simgrag/pipeline.hpp"

namespace simgrag::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kMismatch = 3,
  kUpstream = 4,
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Directory holding templates/ and shots/; SIMGRAG_DATA_DIR overrides the
// build-time default.
std::string default_data_dir();

// Fixture recording for the toy query sets: each query line carries
// "pattern_responses" (successive pattern-step replies) and, for QA,
// "answer_term" (the pattern node whose mapped entity is the answer). The
// answer-step reply is derived from the retrieved evidence, so the recorded
// answers reflect what retrieval actually returned.
struct FixtureSources {
  std::string queries_path;  // QA set, may be empty
  std::string claims_path;   // verification set, may be empty
};

struct PromptSet {
  PromptTemplate pattern;
  PromptTemplate answer;
};

// Templates plus shot banks for "kgqa" or "factkg"; shots < 0 means
// min(12, bank size).
PromptSet load_prompts(const std::string& data_dir, const std::string& style, int shots);

std::map<std::string, std::string> record_fixtures(const Retriever& retriever, const FixtureSources& sources,
                                                   const PromptSet& qa, const PromptSet& fv,
                                                   const PipelineOptions& options);

}  // namespace simgrag::cli
