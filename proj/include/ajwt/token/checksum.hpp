#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace ajwt::token {

// A SHA-256 digest rendered as "sha256:<64 lowercase hex>". The algorithm
// prefix is part of the wire value everywhere a checksum travels (claims,
// headers, logs).
struct Checksum {
  std::array<std::uint8_t, 32> digest{};

  std::string to_string() const;
  static std::optional<Checksum> parse(std::string_view text);

  auto operator<=>(const Checksum&) const = default;
};

Checksum compute_checksum(std::span<const std::uint8_t> data);
Checksum compute_checksum(std::string_view data);

}  // namespace ajwt::token
