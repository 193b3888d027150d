#pragma once

// Compact JWS minting and verification (RS256). Intent-bearing tokens and
// plain access tokens share one wire format, so legacy verifiers parse both.

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "ajwt/token/claims.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::token {

struct IssuerKey {
  std::string kid;
  EvpKey key;  // RSA private key

  static IssuerKey generate(const std::string& kid);
};

// kid → RSA public key.
using TrustedKeys = std::map<std::string, EvpKey>;

// Compact serialization: base64url(header).base64url(payload).base64url(sig),
// header {"alg":"RS256","kid":...,"typ":"JWT"}. Throws std::invalid_argument
// on claims invariant violations.
std::string mint_token(const TokenClaims& claims, const IssuerKey& issuer_key);

enum class TokenError {
  none,
  malformed,       // not three base64url parts / bad JSON / missing members
  bad_signature,   // unknown kid, unsupported alg, or signature mismatch
  wrong_issuer,
  wrong_audience,
  expired,         // also covers iat in the future
};

const char* token_error_name(TokenError error);

struct TokenVerifyResult {
  TokenError error = TokenError::malformed;
  TokenClaims claims;  // populated only when error == none

  bool ok() const { return error == TokenError::none; }
};

TokenVerifyResult verify_token(const std::string& token, const TrustedKeys& trusted_keys,
                               const std::string& expected_iss, const std::string& expected_aud,
                               std::int64_t now);

// Decodes without any verification (diagnostics / CLI inspect).
struct DecodedToken {
  nlohmann::json header;
  nlohmann::json payload;
};
std::optional<DecodedToken> decode_token_unverified(const std::string& token);

// RFC 7517-style JWK set carrying the issuer's RSA public keys.
nlohmann::json jwks_from_issuer(const IssuerKey& issuer_key);
// Returns kid → public key; ignores entries that are not RS256 RSA keys.
TrustedKeys trusted_keys_from_jwks(const nlohmann::json& jwks);

}  // namespace ajwt::token
