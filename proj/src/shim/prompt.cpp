#include "ajwt/shim/prompt.hpp"

#include <vector>

namespace ajwt::shim {

namespace {

// The template as alternating literal/slot segments:
// literals[0] {slots[0]} literals[1] {slots[1]} … literals[n].
struct TemplateSegments {
  std::vector<std::string> literals;  // always slots.size() + 1 entries
  std::vector<std::string> slots;
};

// Mirrors the placeholder scan used for checksumming: a slot is {identifier}
// with no brace or space inside; everything else is literal text.
TemplateSegments segment_template(const std::string& prompt_template) {
  TemplateSegments out;
  std::string literal;
  std::size_t pos = 0;
  while (pos < prompt_template.size()) {
    std::size_t open = prompt_template.find('{', pos);
    if (open == std::string::npos) break;
    std::size_t close = prompt_template.find('}', open + 1);
    if (close == std::string::npos) break;
    std::string name = prompt_template.substr(open + 1, close - open - 1);
    if (!name.empty() && name.find('{') == std::string::npos &&
        name.find(' ') == std::string::npos) {
      literal += prompt_template.substr(pos, open - pos);
      out.literals.push_back(std::move(literal));
      literal.clear();
      out.slots.push_back(std::move(name));
      pos = close + 1;
    } else {
      literal += prompt_template.substr(pos, open + 1 - pos);
      pos = open + 1;
    }
  }
  literal += prompt_template.substr(pos);
  out.literals.push_back(std::move(literal));
  return out;
}

bool has_brace(const std::string& value) {
  return value.find('{') != std::string::npos || value.find('}') != std::string::npos;
}

}  // namespace

Result<std::string> render_prompt(const token::AgentSignature& signature,
                                  const std::map<std::string, std::string>& substitutions) {
  using R = Result<std::string>;
  TemplateSegments segments = segment_template(signature.prompt_template);

  for (const auto& [slot, value] : substitutions) {
    bool declared = false;
    for (const std::string& name : segments.slots)
      if (name == slot) declared = true;
    if (!declared) return R::failure("bad_substitution", "no such slot: {" + slot + "}");
    if (has_brace(value))
      return R::failure("bad_substitution", "value for {" + slot + "} contains a brace");
  }

  std::string rendered = segments.literals.front();
  for (std::size_t i = 0; i < segments.slots.size(); ++i) {
    auto value = substitutions.find(segments.slots[i]);
    if (value == substitutions.end())
      return R::failure("bad_substitution", "missing value for {" + segments.slots[i] + "}");
    rendered += value->second;
    rendered += segments.literals[i + 1];
  }
  return R::success(std::move(rendered));
}

Result<std::map<std::string, std::string>> validate_live_prompt(
    const token::AgentSignature& signature, const std::string& live_prompt) {
  using R = Result<std::map<std::string, std::string>>;
  TemplateSegments segments = segment_template(signature.prompt_template);

  const std::string& head = segments.literals.front();
  if (live_prompt.compare(0, head.size(), head) != 0)
    return R::failure("prompt_violation", "prompt does not start with the registered template");
  std::size_t pos = head.size();

  std::map<std::string, std::string> extracted;
  for (std::size_t i = 0; i < segments.slots.size(); ++i) {
    const std::string& next_literal = segments.literals[i + 1];
    std::size_t value_end;
    if (next_literal.empty()) {
      // Template ends with this slot (span runs to the end) or two slots
      // abut (the first takes the empty value).
      value_end = i + 1 == segments.slots.size() ? live_prompt.size() : pos;
    } else {
      // Leftmost match, fail-closed: a value that itself contains the next
      // literal is rejected rather than risk swallowing injected text, and
      // anything trailing the final literal fails the exact-consumption
      // check below.
      value_end = live_prompt.find(next_literal, pos);
      if (value_end == std::string::npos)
        return R::failure("prompt_violation",
                          "template text missing from prompt: \"" + next_literal + "\"");
    }

    std::string value = live_prompt.substr(pos, value_end - pos);
    if (has_brace(value))
      return R::failure("prompt_violation", "substituted value contains a brace");
    auto [it, inserted] = extracted.emplace(segments.slots[i], value);
    if (!inserted && it->second != value)
      return R::failure("prompt_violation",
                        "slot {" + segments.slots[i] + "} substituted inconsistently");
    pos = value_end + next_literal.size();
  }

  if (segments.slots.empty() && live_prompt != segments.literals.front())
    return R::failure("prompt_violation", "prompt differs from the slot-free template");
  if (pos != live_prompt.size())
    return R::failure("prompt_violation", "prompt has text beyond the registered template");
  return R::success(std::move(extracted));
}

}  // namespace ajwt::shim
