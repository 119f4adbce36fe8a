#pragma once
// Minimal JSON-over-HTTP POST shared by the remote embedding and chat clients.

#include <string>
#include <utility>
#include <vector>

namespace simgrag::detail {

struct HttpResponse {
  int status = 0;  // 0 when the request never reached the server
  std::string body;
  std::string error;
};

HttpResponse post_json(const std::string& base_url, const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       const std::string& body, int timeout_seconds);

}  // namespace simgrag::detail
