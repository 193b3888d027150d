#include "ajwt/harness/legacy.hpp"

#include <stdexcept>

namespace ajwt::harness {

LegacyClient::LegacyClient(World& world) : world_(world) {
  auto res = world_.post_idp("/token", {{"grant_type", "client_credentials"},
                                        {"client_id", world_.client_id()},
                                        {"client_secret", world_.client_secret()},
                                        {"audience", kAudience}});
  if (res.status != 200)
    throw std::runtime_error("legacy client could not mint a token: " + res.body.dump());
  token_ = res.body.at("access_token").get<std::string>();
  scope_ = res.body.value("scope", "");
}

RawResponse LegacyClient::call(const std::string& method, const std::string& path,
                               const std::string& body) {
  return world_.send_rs(method, path, {{"Authorization", "Bearer " + token_}}, body);
}

}  // namespace ajwt::harness
