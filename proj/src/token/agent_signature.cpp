#include "ajwt/token/agent_signature.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "ajwt/token/canonical.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::token {

std::vector<std::string> template_placeholders(std::string_view prompt_template) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < prompt_template.size()) {
    std::size_t open = prompt_template.find('{', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = prompt_template.find('}', open + 1);
    if (close == std::string_view::npos) break;
    std::string_view name = prompt_template.substr(open + 1, close - open - 1);
    // Placeholders are simple identifiers; anything containing a brace or
    // whitespace is literal text, not a slot.
    if (!name.empty() && name.find('{') == std::string_view::npos &&
        name.find(' ') == std::string_view::npos) {
      out.emplace_back(name);
      pos = close + 1;
    } else {
      pos = open + 1;
    }
  }
  return out;
}

std::string canonicalize_agent_signature(const AgentSignature& sig) {
  std::set<std::string> names;
  for (const ToolDescriptor& tool : sig.tools) {
    if (tool.name.empty()) throw std::invalid_argument("tool name must be non-empty");
    if (!names.insert(tool.name).second)
      throw std::invalid_argument("duplicate tool name: " + tool.name);
  }

  std::vector<std::string> placeholders = template_placeholders(sig.prompt_template);
  for (const std::string& slot : sig.substitution_slots) {
    if (std::find(placeholders.begin(), placeholders.end(), slot) == placeholders.end())
      throw std::invalid_argument("substitution slot not present in template: " + slot);
  }

  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : sig.config) {
    if (!value.is_primitive() || value.is_binary())
      throw std::invalid_argument("config value must be a scalar: " + key);
    config[key] = value;
  }

  std::vector<const ToolDescriptor*> ordered;
  ordered.reserve(sig.tools.size());
  for (const ToolDescriptor& tool : sig.tools) ordered.push_back(&tool);
  std::sort(ordered.begin(), ordered.end(),
            [](const ToolDescriptor* a, const ToolDescriptor* b) { return a->name < b->name; });

  nlohmann::json tools = nlohmann::json::array();
  for (const ToolDescriptor* tool : ordered) {
    tools.push_back({{"description", tool->description},
                     {"name", tool->name},
                     {"signature", tool->signature}});
  }

  nlohmann::json doc{{"config", std::move(config)},
                     {"prompt_template", sig.prompt_template},
                     {"substitution_slots", sig.substitution_slots},
                     {"tools", std::move(tools)}};
  return canonical_dump(doc);
}

Checksum agent_signature_checksum(const AgentSignature& sig) {
  return compute_checksum(canonicalize_agent_signature(sig));
}

}  // namespace ajwt::token
