#pragma once
// Small helpers shared by the test suites.

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "simgrag/kg_store.hpp"

namespace simgrag::test {

inline std::string data_dir() { return SIMGRAG_TEST_DATA_DIR; }

// Graph from "h|r|t" strings.
inline KnowledgeGraph graph_of(const std::vector<std::string>& rows) {
  std::string tsv;
  for (auto row : rows) {
    for (auto& c : row) {
      if (c == '|') c = '\t';
    }
    tsv += row + "\n";
  }
  std::istringstream in(tsv);
  return load_triples(in);
}

// Fresh path under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("simgrag_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace simgrag::test
