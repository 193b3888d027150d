#include "ajwt/shim/http_client.hpp"

#include <httplib.h>

namespace ajwt::shim {

Result<HttpResponse> HttplibClient::send(const std::string& method, const std::string& base_url,
                                         const std::string& path,
                                         const std::map<std::string, std::string>& headers,
                                         const std::string& body,
                                         const std::string& content_type) {
  using R = Result<HttpResponse>;
  httplib::Client client(base_url);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);

  httplib::Headers wire_headers;
  for (const auto& [name, value] : headers) wire_headers.emplace(name, value);

  httplib::Result res;
  if (method == "GET")
    res = client.Get(path, wire_headers);
  else if (method == "POST")
    res = client.Post(path, wire_headers, body, content_type);
  else if (method == "PUT")
    res = client.Put(path, wire_headers, body, content_type);
  else if (method == "DELETE")
    res = client.Delete(path, wire_headers, body, content_type);
  else if (method == "PATCH")
    res = client.Patch(path, wire_headers, body, content_type);
  else
    return R::failure("transport_error", "unsupported method: " + method);

  if (!res)
    return R::failure("transport_error",
                      "no response from " + base_url + path + ": " + httplib::to_string(res.error()));
  return R::success({res->status, res->body});
}

}  // namespace ajwt::shim
