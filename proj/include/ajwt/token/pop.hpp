#pragma once

// Proof-of-possession over HTTP requests: Ed25519 signatures carried in
// "Signature-Input" / "Signature" headers, RFC 9421-style syntax. The covered
// component set is fixed: @method, @path, authorization, content-digest.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ajwt/token/checksum.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::token {

struct PopKeyPair {
  std::string kid;   // "agent:<id>#<timestamp>"
  EvpKey key;        // Ed25519 private key
  Bytes public_key;  // raw 32-byte public half

  static PopKeyPair generate(const std::string& agent_id, std::int64_t now);
  static PopKeyPair from_seed(const std::string& kid, std::span<const std::uint8_t> seed);
  Bytes seed() const;  // raw private seed (CLI key files only; never on the wire)
};

// Thumbprint over the canonical required-members JWK form
// {"crv":"Ed25519","kty":"OKP","x":"<base64url>"}.
Checksum jwk_thumbprint(std::span<const std::uint8_t> public_key);

struct SignatureHeaders {
  std::string signature_input;  // value for "Signature-Input"
  std::string signature;        // value for "Signature"
};

// Signs the canonical signature base for (method, path, authorization header
// value, body digest) with created/keyid/nonce parameters. Throws
// std::invalid_argument when a covered value is missing.
SignatureHeaders sign_http_request(const std::string& method, const std::string& path,
                                   const std::string& authorization,
                                   const Checksum& content_digest, const PopKeyPair& key,
                                   std::int64_t created, const std::string& nonce);

// Parameters recovered from a Signature-Input header (label "sig").
struct SignatureInputParams {
  std::vector<std::string> components;
  std::string alg;
  std::int64_t created = 0;
  std::string keyid;
  std::string nonce;
};
std::optional<SignatureInputParams> parse_signature_input(const std::string& signature_input);

enum class PopStatus {
  ok,
  malformed,      // headers unparseable or covered-component set wrong
  bad_signature,  // signature does not verify under the given key
  stale,          // |created - now| > max_skew
};

PopStatus verify_http_signature(const std::string& method, const std::string& path,
                                const std::string& authorization,
                                const Checksum& content_digest,
                                const std::string& signature_input,
                                const std::string& signature,
                                std::span<const std::uint8_t> public_key, std::int64_t now,
                                std::int64_t max_skew);

}  // namespace ajwt::token
