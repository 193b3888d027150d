#pragma once

// Thin RAII layer over libcrypto: digests, MACs, RSA/Ed25519 signatures,
// randomness, and the base64/hex codecs the wire formats use.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

using EVP_PKEY = struct evp_pkey_st;

namespace ajwt::token {

using Bytes = std::vector<std::uint8_t>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

std::string base64url_encode(std::span<const std::uint8_t> data);   // unpadded
std::optional<Bytes> base64url_decode(std::string_view text);
std::string base64_encode(std::span<const std::uint8_t> data);      // padded, standard alphabet
std::optional<Bytes> base64_decode(std::string_view text);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);
std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t> key,
                                         std::span<const std::uint8_t> data);
bool constant_time_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

Bytes random_bytes(std::size_t n);

// Shared-ownership EVP_PKEY handle; copies bump the refcount.
class EvpKey {
 public:
  EvpKey() = default;
  explicit EvpKey(EVP_PKEY* owned);  // takes ownership
  EVP_PKEY* get() const { return key_.get(); }
  explicit operator bool() const { return static_cast<bool>(key_); }

 private:
  std::shared_ptr<EVP_PKEY> key_;
};

// RSA-2048, RSASSA-PKCS1-v1_5 with SHA-256 ("RS256").
EvpKey generate_rsa_key();
Bytes rs256_sign(const EvpKey& private_key, std::span<const std::uint8_t> data);
bool rs256_verify(const EvpKey& public_key, std::span<const std::uint8_t> data,
                  std::span<const std::uint8_t> signature);
// (n, e) as unpadded big-endian byte strings, for JWK interchange.
struct RsaPublicParts {
  Bytes n;
  Bytes e;
};
RsaPublicParts rsa_public_parts(const EvpKey& key);
EvpKey rsa_public_from_parts(const RsaPublicParts& parts);
// PEM (PKCS#8) round-trip for on-disk issuer keys.
std::string rsa_private_to_pem(const EvpKey& key);
EvpKey rsa_private_from_pem(const std::string& pem);

// Ed25519 raw-key operations (32-byte seeds / public keys, 64-byte signatures).
EvpKey generate_ed25519_key();
EvpKey ed25519_private_from_seed(std::span<const std::uint8_t> seed);
EvpKey ed25519_public_from_raw(std::span<const std::uint8_t> pub);
Bytes ed25519_public_raw(const EvpKey& key);
Bytes ed25519_seed_raw(const EvpKey& private_key);
Bytes ed25519_sign(const EvpKey& private_key, std::span<const std::uint8_t> data);
bool ed25519_verify(const EvpKey& public_key, std::span<const std::uint8_t> data,
                    std::span<const std::uint8_t> signature);

}  // namespace ajwt::token
