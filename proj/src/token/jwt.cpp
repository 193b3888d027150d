#include "ajwt/token/jwt.hpp"

#include "ajwt/token/canonical.hpp"

namespace ajwt::token {

IssuerKey IssuerKey::generate(const std::string& kid) {
  return IssuerKey{kid, generate_rsa_key()};
}

std::string mint_token(const TokenClaims& claims, const IssuerKey& issuer_key) {
  check_claims_invariants(claims);
  nlohmann::json header{{"alg", "RS256"}, {"kid", issuer_key.kid}, {"typ", "JWT"}};
  std::string signing_input = base64url_encode(as_bytes(canonical_dump(header))) + "." +
                              base64url_encode(as_bytes(canonical_dump(claims_to_json(claims))));
  Bytes signature = rs256_sign(issuer_key.key, as_bytes(signing_input));
  return signing_input + "." + base64url_encode(signature);
}

const char* token_error_name(TokenError error) {
  switch (error) {
    case TokenError::none: return "none";
    case TokenError::malformed: return "malformed";
    case TokenError::bad_signature: return "bad_signature";
    case TokenError::wrong_issuer: return "wrong_issuer";
    case TokenError::wrong_audience: return "wrong_audience";
    case TokenError::expired: return "expired";
  }
  return "malformed";
}

namespace {

struct SplitToken {
  std::string_view header;
  std::string_view payload;
  std::string_view signature;
};

std::optional<SplitToken> split_compact(std::string_view token) {
  std::size_t first = token.find('.');
  if (first == std::string_view::npos) return std::nullopt;
  std::size_t second = token.find('.', first + 1);
  if (second == std::string_view::npos) return std::nullopt;
  if (token.find('.', second + 1) != std::string_view::npos) return std::nullopt;
  return SplitToken{token.substr(0, first), token.substr(first + 1, second - first - 1),
                    token.substr(second + 1)};
}

nlohmann::json parse_json_part(std::string_view part) {
  auto raw = base64url_decode(part);
  if (!raw) return nlohmann::json(nlohmann::json::value_t::discarded);
  return nlohmann::json::parse(raw->begin(), raw->end(), /*cb=*/nullptr,
                               /*allow_exceptions=*/false);
}

}  // namespace

TokenVerifyResult verify_token(const std::string& token, const TrustedKeys& trusted_keys,
                               const std::string& expected_iss, const std::string& expected_aud,
                               std::int64_t now) {
  TokenVerifyResult result;
  auto parts = split_compact(token);
  if (!parts) return result;  // malformed

  nlohmann::json header = parse_json_part(parts->header);
  if (header.is_discarded() || !header.is_object()) return result;
  auto alg = header.find("alg");
  auto kid = header.find("kid");
  if (alg == header.end() || !alg->is_string() || kid == header.end() || !kid->is_string())
    return result;

  auto signature = base64url_decode(parts->signature);
  if (!signature) return result;

  if (*alg != "RS256") {
    result.error = TokenError::bad_signature;  // "none"/downgrade attempts land here
    return result;
  }
  auto key = trusted_keys.find(kid->get<std::string>());
  if (key == trusted_keys.end()) {
    result.error = TokenError::bad_signature;
    return result;
  }
  std::string signing_input =
      std::string(parts->header) + "." + std::string(parts->payload);
  if (!rs256_verify(key->second, as_bytes(signing_input), *signature)) {
    result.error = TokenError::bad_signature;
    return result;
  }

  nlohmann::json payload = parse_json_part(parts->payload);
  if (payload.is_discarded()) return result;
  auto claims = claims_from_json(payload);
  if (!claims) return result;

  if (claims->iss != expected_iss) {
    result.error = TokenError::wrong_issuer;
    return result;
  }
  if (claims->aud != expected_aud) {
    result.error = TokenError::wrong_audience;
    return result;
  }
  if (now >= claims->exp || claims->iat > now) {
    result.error = TokenError::expired;
    return result;
  }

  result.error = TokenError::none;
  result.claims = std::move(*claims);
  return result;
}

std::optional<DecodedToken> decode_token_unverified(const std::string& token) {
  auto parts = split_compact(token);
  if (!parts) return std::nullopt;
  nlohmann::json header = parse_json_part(parts->header);
  nlohmann::json payload = parse_json_part(parts->payload);
  if (header.is_discarded() || payload.is_discarded()) return std::nullopt;
  return DecodedToken{std::move(header), std::move(payload)};
}

nlohmann::json jwks_from_issuer(const IssuerKey& issuer_key) {
  RsaPublicParts parts = rsa_public_parts(issuer_key.key);
  return nlohmann::json{{"keys",
                         {{{"kty", "RSA"},
                           {"alg", "RS256"},
                           {"use", "sig"},
                           {"kid", issuer_key.kid},
                           {"n", base64url_encode(parts.n)},
                           {"e", base64url_encode(parts.e)}}}}};
}

TrustedKeys trusted_keys_from_jwks(const nlohmann::json& jwks) {
  TrustedKeys keys;
  auto list = jwks.find("keys");
  if (list == jwks.end() || !list->is_array()) return keys;
  for (const auto& jwk : *list) {
    if (!jwk.is_object()) continue;
    auto kty = jwk.find("kty");
    auto kid = jwk.find("kid");
    auto n = jwk.find("n");
    auto e = jwk.find("e");
    if (kty == jwk.end() || *kty != "RSA" || kid == jwk.end() || !kid->is_string() ||
        n == jwk.end() || !n->is_string() || e == jwk.end() || !e->is_string())
      continue;
    auto n_raw = base64url_decode(n->get<std::string>());
    auto e_raw = base64url_decode(e->get<std::string>());
    if (!n_raw || !e_raw) continue;
    keys.emplace(kid->get<std::string>(), rsa_public_from_parts({*n_raw, *e_raw}));
  }
  return keys;
}

}  // namespace ajwt::token
