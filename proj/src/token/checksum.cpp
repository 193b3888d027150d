#include "ajwt/token/checksum.hpp"

#include <algorithm>

#include "ajwt/token/crypto.hpp"

namespace ajwt::token {

namespace {
constexpr std::string_view kPrefix = "sha256:";
}

std::string Checksum::to_string() const {
  return std::string(kPrefix) + to_hex(digest);
}

std::optional<Checksum> Checksum::parse(std::string_view text) {
  if (!text.starts_with(kPrefix)) return std::nullopt;
  text.remove_prefix(kPrefix.size());
  if (text.size() != 64) return std::nullopt;
  if (std::any_of(text.begin(), text.end(), [](char c) { return c >= 'A' && c <= 'F'; }))
    return std::nullopt;  // uppercase hex is not the canonical rendering
  auto raw = from_hex(text);
  if (!raw) return std::nullopt;
  Checksum out;
  std::copy(raw->begin(), raw->end(), out.digest.begin());
  return out;
}

Checksum compute_checksum(std::span<const std::uint8_t> data) {
  return Checksum{sha256(data)};
}

Checksum compute_checksum(std::string_view data) {
  return compute_checksum(as_bytes(data));
}

}  // namespace ajwt::token
