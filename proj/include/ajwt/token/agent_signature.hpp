#pragma once

// An agent's identity material: everything that determines its behaviour
// (prompt template, declared substitution slots, tool surface, model config)
// collapses into one checksum. The TEMPLATE is hashed with its {slot}
// placeholders intact — substituted text never enters the digest; runtime
// substitutions are instead validated against substitution_slots.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ajwt/token/checksum.hpp"

namespace ajwt::token {

struct ToolDescriptor {
  std::string name;         // unique within one signature
  std::string signature;    // parameter-list rendering, e.g. "(repo: str) -> str"
  std::string description;

  bool operator==(const ToolDescriptor&) const = default;
};

struct AgentSignature {
  std::string prompt_template;
  std::vector<std::string> substitution_slots;     // slot names allowed to vary at runtime
  std::vector<ToolDescriptor> tools;
  std::map<std::string, nlohmann::json> config;    // scalar values only

  bool operator==(const AgentSignature&) const = default;
};

// Placeholder names appearing as {name} in a template, in order of appearance.
std::vector<std::string> template_placeholders(std::string_view prompt_template);

// Deterministic byte encoding (canonical JSON; tools sorted by name, config
// keys sorted). Throws std::invalid_argument on duplicate tool names, slots
// missing from the template, or non-scalar config values.
std::string canonicalize_agent_signature(const AgentSignature& sig);

Checksum agent_signature_checksum(const AgentSignature& sig);

}  // namespace ajwt::token
