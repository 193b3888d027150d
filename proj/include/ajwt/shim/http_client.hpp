#pragma once

// Outbound transport abstraction: the shim speaks to the issuer and to
// resource servers through this interface, so tests can count or intercept
// traffic. HttplibClient is the real loopback/production implementation.

#include <map>
#include <memory>
#include <string>

#include "ajwt/result.hpp"

namespace ajwt::shim {

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpClient {
 public:
  virtual ~HttpClient() = default;

  // `base_url` like "http://127.0.0.1:4318"; `path` starts with '/'. Returns
  // failure ("transport_error") only when no response arrived at all; any
  // HTTP status, including errors, is a success carrying that status.
  virtual Result<HttpResponse> send(const std::string& method, const std::string& base_url,
                                    const std::string& path,
                                    const std::map<std::string, std::string>& headers,
                                    const std::string& body,
                                    const std::string& content_type) = 0;
};

class HttplibClient : public HttpClient {
 public:
  Result<HttpResponse> send(const std::string& method, const std::string& base_url,
                            const std::string& path,
                            const std::map<std::string, std::string>& headers,
                            const std::string& body, const std::string& content_type) override;
};

}  // namespace ajwt::shim
