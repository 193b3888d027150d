#pragma once

#include <string>

#include <json.hpp>

namespace ajwt::token {

// Canonical JSON rendering: object keys in ascending byte order, no
// insignificant whitespace, UTF-8. nlohmann::json's default object storage
// (std::map) keeps keys sorted, and dump() emits compact UTF-8, so dump() of a
// tree built from sorted containers *is* the canonical form. Every checksum,
// MAC, and hash-chain input in this codebase goes through this function so the
// byte layout is defined in exactly one place (see docs/wire-format.md).
inline std::string canonical_dump(const nlohmann::json& value) {
  return value.dump();
}

}  // namespace ajwt::token
