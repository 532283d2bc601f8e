#include "genderprobe/http_client.hpp"

#include "genderprobe/error.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

namespace genderprobe::http {

namespace {
std::atomic<std::size_t> g_outbound{0};
}

Url parse_url(const std::string& url) {
  Url u;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint '" + url + "' has no scheme");
  u.scheme = url.substr(0, scheme_end);
  if (u.scheme != "http" && u.scheme != "https") throw ValidationError("unsupported scheme in '" + url + "'");
  const auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  u.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = authority.rfind(':');
  if (colon != std::string::npos && authority.find(']') == std::string::npos) {
    u.host = authority.substr(0, colon);
    try {
      u.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad port in '" + url + "'");
    }
  } else {
    u.host = authority;
    u.port = u.scheme == "https" ? 443 : 80;
  }
  if (u.host.empty()) throw ValidationError("endpoint '" + url + "' has no host");
  return u;
}

bool is_loopback(const std::string& host) {
  return host == "localhost" || host == "::1" || host == "[::1]" || host.rfind("127.", 0) == 0;
}

std::size_t outbound_request_count() { return g_outbound.load(); }

std::string post_json(const Request& request, const RetryPolicy& policy) {
  const Url url = parse_url(request.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.scheme == "https") throw ValidationError("this build has no TLS support; use an http:// endpoint");
#endif
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  std::string last_error;
  for (int attempt = 0; attempt <= policy.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(policy.backoff_base * (1 << (attempt - 1)));
    if (!is_loopback(url.host)) ++g_outbound;

    httplib::Client client(url.scheme + "://" + url.host + ":" + std::to_string(url.port));
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(url.path, headers, request.body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError(request.url + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    return res->body;
  }
  throw TransportError(request.url + ": giving up after " + std::to_string(policy.retries + 1) +
                       " attempts: " + last_error);
}

}  // namespace genderprobe::http
