#pragma once

#include <string>

#include "ajwt/harness/world.hpp"

namespace ajwt::harness {

// The before-phase application: one bearer token minted with the
// client_credentials grant and shared by every agent process. No identity,
// no workflow state, no request signing — each call carries nothing but the
// token, which is exactly the posture the threat scripts exploit.
class LegacyClient {
 public:
  explicit LegacyClient(World& world);

  const std::string& token() const { return token_; }
  const std::string& scope() const { return scope_; }

  // A bare API call as the legacy client makes it: Authorization header only.
  RawResponse call(const std::string& method, const std::string& path,
                   const std::string& body = "");

 private:
  World& world_;
  std::string token_;
  std::string scope_;
};

}  // namespace ajwt::harness
