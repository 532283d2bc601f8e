#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace genderprobe::http {

struct Url {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path;
};

Url parse_url(const std::string& url);
bool is_loopback(const std::string& host);

struct RetryPolicy {
  int retries = 3;
  std::chrono::milliseconds backoff_base{1000};
};

struct Request {
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{30000};
};

// POSTs a JSON body. Connection failures, timeouts and 5xx responses are retried
// with exponential backoff (base, 2*base, 4*base, ...). Returns the 2xx body or
// throws TransportError.
std::string post_json(const Request& request, const RetryPolicy& policy);

// Requests sent to hosts other than loopback since process start.
std::size_t outbound_request_count();

}  // namespace genderprobe::http
