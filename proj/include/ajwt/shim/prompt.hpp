#pragma once

// Call-time prompt discipline: the registered template is immutable; only the
// declared substitution slots may vary. Rendering fills slots from a value
// map; validation takes a live prompt observed at call time and proves it is
// the template with substitutions confined to those slots, recovering the
// substituted values. Anything else — edited instructions, text outside a
// slot, injected braces — is a structural violation and the call must abort
// locally.

#include <map>
#include <string>

#include "ajwt/result.hpp"
#include "ajwt/token/agent_signature.hpp"

namespace ajwt::shim {

// Fills every {slot} in the template. Fails ("bad_substitution") when a
// placeholder has no value, a value names no placeholder, or a value contains
// '{' or '}' (which could forge new slots).
Result<std::string> render_prompt(const token::AgentSignature& signature,
                                  const std::map<std::string, std::string>& substitutions);

// Matches the live prompt against the template: literal segments must appear
// verbatim, in order, and consume the prompt exactly; slot spans become the
// extracted values. Parsing is leftmost and fail-closed — a value containing
// the next literal, a brace, trailing text after the final literal, or
// inconsistent values for a repeated slot all fail with "prompt_violation".
Result<std::map<std::string, std::string>> validate_live_prompt(
    const token::AgentSignature& signature, const std::string& live_prompt);

}  // namespace ajwt::shim
