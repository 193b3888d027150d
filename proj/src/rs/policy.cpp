#include "ajwt/rs/policy.hpp"

namespace ajwt::rs {

bool EndpointPolicy::matches(const std::string& request_method, const std::string& path) const {
  if (method != request_method) return false;
  if (route.ends_with('*'))
    return path.size() >= route.size() - 1 &&
           path.compare(0, route.size() - 1, route, 0, route.size() - 1) == 0;
  return path == route;
}

const EndpointPolicy* PolicyConfig::match(const std::string& method,
                                          const std::string& path) const {
  for (const EndpointPolicy& policy : endpoints)
    if (policy.matches(method, path)) return &policy;
  return nullptr;
}

std::optional<PolicyConfig> PolicyConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) return std::nullopt;
  auto endpoints = doc.find("endpoints");
  if (endpoints == doc.end() || !endpoints->is_array()) return std::nullopt;
  PolicyConfig config;
  for (const auto& entry : *endpoints) {
    EndpointPolicy policy;
    auto method = entry.find("method");
    auto route = entry.find("route");
    if (method == entry.end() || !method->is_string() || route == entry.end() ||
        !route->is_string())
      return std::nullopt;
    policy.method = method->get<std::string>();
    policy.route = route->get<std::string>();
    if (auto scopes = entry.find("required_scopes"); scopes != entry.end()) {
      if (!scopes->is_array()) return std::nullopt;
      for (const auto& scope : *scopes) {
        if (!scope.is_string()) return std::nullopt;
        policy.required_scopes.insert(scope.get<std::string>());
      }
    }
    if (auto steps = entry.find("allowed_workflow_steps"); steps != entry.end()) {
      if (!steps->is_array()) return std::nullopt;
      for (const auto& pair : *steps) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
            !pair[1].is_string())
          return std::nullopt;
        policy.allowed_workflow_steps.emplace(pair[0].get<std::string>(),
                                              pair[1].get<std::string>());
      }
    }
    if (auto require_intent = entry.find("require_intent");
        require_intent != entry.end() && require_intent->is_boolean())
      policy.require_intent = require_intent->get<bool>();
    config.endpoints.push_back(std::move(policy));
  }
  return config;
}

nlohmann::json PolicyConfig::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const EndpointPolicy& policy : endpoints) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& [workflow_id, step] : policy.allowed_workflow_steps)
      steps.push_back(nlohmann::json::array({workflow_id, step}));
    out.push_back({{"method", policy.method},
                   {"route", policy.route},
                   {"required_scopes", policy.required_scopes},
                   {"allowed_workflow_steps", std::move(steps)},
                   {"require_intent", policy.require_intent}});
  }
  return {{"endpoints", std::move(out)}};
}

}  // namespace ajwt::rs
