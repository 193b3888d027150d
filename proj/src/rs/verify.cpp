#include "ajwt/rs/verify.hpp"

#include <algorithm>
#include <sstream>

#include "ajwt/token/pop.hpp"

namespace ajwt::rs {

namespace {

Decision deny(const char* reason) {
  Decision decision;
  decision.allowed = false;
  decision.deny_reason = reason;
  decision.http_status =
      (decision.deny_reason == kDenyScopeInsufficient ||
       decision.deny_reason == kDenyStepNotAllowedForEndpoint)
          ? 403
          : 401;
  return decision;
}

Decision deny_with_claims(const char* reason, const token::TokenClaims& claims) {
  Decision decision = deny(reason);
  decision.claims = claims;
  return decision;
}

// exp/iat read from the (already signature-checked) payload, used to keep the
// expiry check ahead of the audience check when both fail.
bool lifetime_violated(const std::string& bearer, std::int64_t now) {
  auto decoded = token::decode_token_unverified(bearer);
  if (!decoded || !decoded->payload.is_object()) return true;
  auto exp = decoded->payload.find("exp");
  auto iat = decoded->payload.find("iat");
  if (exp == decoded->payload.end() || !exp->is_number_integer() ||
      iat == decoded->payload.end() || !iat->is_number_integer())
    return true;
  return now >= exp->get<std::int64_t>() || iat->get<std::int64_t>() > now;
}

Decision verify_request_impl(const RequestView& request, const EndpointPolicy& policy,
                             const TrustMaterial& trust, ReplayCache& replay,
                             std::int64_t now) {
  // 1. malformed_token: the Authorization header must present a bearer token.
  static constexpr std::string_view kBearerPrefix = "Bearer ";
  if (request.authorization.size() <= kBearerPrefix.size() ||
      request.authorization.compare(0, kBearerPrefix.size(), kBearerPrefix) != 0)
    return deny(kDenyMalformedToken);
  std::string bearer = request.authorization.substr(kBearerPrefix.size());

  // 2–4. Signature, lifetime, audience. The shared verifier reports the first
  // failure in its own order (issuer before audience before lifetime); remap
  // to this pipeline's order: an untrusted issuer is indistinguishable from a
  // forged token (bad_signature), and expiry outranks a wrong audience.
  auto verified = token::verify_token(bearer, trust.issuer_keys, trust.expected_issuer,
                                      trust.expected_audience, now);
  switch (verified.error) {
    case token::TokenError::none:
      break;
    case token::TokenError::malformed:
      return deny(kDenyMalformedToken);
    case token::TokenError::bad_signature:
    case token::TokenError::wrong_issuer:
      return deny(kDenyBadSignature);
    case token::TokenError::expired:
      return deny(kDenyExpired);
    case token::TokenError::wrong_audience:
      return deny(lifetime_violated(bearer, now) ? kDenyExpired : kDenyWrongAudience);
  }
  const token::TokenClaims& claims = verified.claims;

  // 5. scope_insufficient: every scope the endpoint requires must be granted.
  std::set<std::string> granted = scope_set(claims.scope);
  if (!std::includes(granted.begin(), granted.end(), policy.required_scopes.begin(),
                     policy.required_scopes.end()))
    return deny_with_claims(kDenyScopeInsufficient, claims);

  // 6. intent_missing: intent-mandatory routes reject plain access tokens.
  if (policy.require_intent && !claims.intent)
    return deny_with_claims(kDenyIntentMissing, claims);

  // 7. step_not_allowed_for_endpoint: an intent token only opens the routes
  // mapped to its (workflow, step). Legacy routes with no step mapping let
  // intent tokens through on scope alone.
  if (claims.intent && (policy.require_intent || !policy.allowed_workflow_steps.empty())) {
    std::pair<std::string, std::string> presented{claims.intent->workflow_id,
                                                  claims.intent->workflow_step};
    if (!policy.allowed_workflow_steps.contains(presented))
      return deny_with_claims(kDenyStepNotAllowedForEndpoint, claims);
  }

  // 8–11. Proof of possession, when the token is key-bound. The request
  // signature must verify under exactly the public key whose thumbprint the
  // token carries, be fresh, and never have been presented before.
  if (claims.cnf) {
    if (token::jwk_thumbprint(claims.cnf->public_key) != claims.cnf->jkt)
      return deny_with_claims(kDenyPopThumbprintMismatch, claims);
    if (request.signature_input.empty() || request.signature.empty())
      return deny_with_claims(kDenyPopSignatureInvalid, claims);
    token::Checksum body_digest = token::compute_checksum(request.body);
    token::PopStatus pop = token::verify_http_signature(
        request.method, request.path, request.authorization, body_digest,
        request.signature_input, request.signature, claims.cnf->public_key, now,
        trust.pop_max_skew);
    switch (pop) {
      case token::PopStatus::ok:
        break;
      case token::PopStatus::malformed:
      case token::PopStatus::bad_signature:
        return deny_with_claims(kDenyPopSignatureInvalid, claims);
      case token::PopStatus::stale:
        return deny_with_claims(kDenyPopStale, claims);
    }
    // Replay = the exact signed request seen again. One token legitimately
    // signs many requests; each carries a fresh nonce, so the signature value
    // distinguishes them.
    if (!replay.insert_if_absent(claims.jti, request.signature, claims.exp))
      return deny_with_claims(kDenyJtiReplayed, claims);
  }

  // 12. shim_checksum_invalid: intent-bearing traffic must declare a shim
  // build the issuer currently publishes.
  if (claims.intent) {
    auto presented = token::Checksum::parse(request.shim_checksum);
    bool known = false;
    if (presented)
      for (const auto& [version, checksum] : trust.shim_versions)
        if (checksum == *presented) {
          known = true;
          break;
        }
    if (!known) return deny_with_claims(kDenyShimChecksumInvalid, claims);
  }

  Decision decision;
  decision.allowed = true;
  decision.claims = claims;
  decision.http_status = 200;
  return decision;
}

}  // namespace

std::set<std::string> scope_set(const std::string& scope) {
  std::set<std::string> out;
  std::istringstream stream(scope);
  std::string item;
  while (stream >> item) out.insert(item);
  return out;
}

Decision verify_request(const RequestView& request, const EndpointPolicy& policy,
                        const TrustMaterial& trust, ReplayCache& replay, std::int64_t now) {
  // Fail closed: whatever goes wrong inside verification, the answer is deny.
  try {
    return verify_request_impl(request, policy, trust, replay, now);
  } catch (...) {
    return deny(kDenyMalformedToken);
  }
}

}  // namespace ajwt::rs
