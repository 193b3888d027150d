#pragma once

// Declarative endpoint policy: which scopes a route needs, which workflow
// steps may call it, and whether intent claims are mandatory. Routes with
// require_intent=false still validate plain bearer tokens (legacy path).

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ajwt::rs {

struct EndpointPolicy {
  std::string method;  // "GET", "POST", ...
  std::string route;   // exact path, or prefix ending in '*'
  std::set<std::string> required_scopes;
  std::set<std::pair<std::string, std::string>> allowed_workflow_steps;  // (workflow_id, step)
  bool require_intent = true;

  bool matches(const std::string& request_method, const std::string& path) const;
};

struct PolicyConfig {
  std::vector<EndpointPolicy> endpoints;

  const EndpointPolicy* match(const std::string& method, const std::string& path) const;

  // {"endpoints":[{"method","route","required_scopes":[...],
  //   "allowed_workflow_steps":[["wf","step"],...],"require_intent":bool},...]}
  static std::optional<PolicyConfig> from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

}  // namespace ajwt::rs
