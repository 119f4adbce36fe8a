#include "http.hpp"

#include <httplib.h>

namespace simgrag::detail {

HttpResponse post_json(const std::string& base_url, const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       const std::string& body, int timeout_seconds) {
  httplib::Client client(base_url);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  HttpResponse out;
  if (!res) {
    out.error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  return out;
}

}  // namespace simgrag::detail
