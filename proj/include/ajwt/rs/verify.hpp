#pragma once

// Policy Enforcement Point core: a pure verify_request function that decides
// allow/deny for one HTTP request before any handler runs. Pure and socket-free
// so it can be unit-tested and benchmarked directly; the HTTP adapter is a
// thin wrapper.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "ajwt/rs/policy.hpp"
#include "ajwt/rs/replay.hpp"
#include "ajwt/token/checksum.hpp"
#include "ajwt/token/claims.hpp"
#include "ajwt/token/jwt.hpp"

namespace ajwt::rs {

// Deny reasons, in the exact order the pipeline evaluates them. When a request
// violates several rules at once, the earliest reason in this list is the one
// reported.
inline constexpr char kDenyMalformedToken[] = "malformed_token";
inline constexpr char kDenyBadSignature[] = "bad_signature";
inline constexpr char kDenyExpired[] = "expired";
inline constexpr char kDenyWrongAudience[] = "wrong_audience";
inline constexpr char kDenyScopeInsufficient[] = "scope_insufficient";
inline constexpr char kDenyIntentMissing[] = "intent_missing";
inline constexpr char kDenyStepNotAllowedForEndpoint[] = "step_not_allowed_for_endpoint";
inline constexpr char kDenyPopThumbprintMismatch[] = "pop_thumbprint_mismatch";
inline constexpr char kDenyPopSignatureInvalid[] = "pop_signature_invalid";
inline constexpr char kDenyPopStale[] = "pop_stale";
inline constexpr char kDenyJtiReplayed[] = "jti_replayed";
inline constexpr char kDenyShimChecksumInvalid[] = "shim_checksum_invalid";

// Everything verify_request needs to see of an HTTP request. Header fields
// are the raw header values, empty string when the header was absent. The
// body digest is always recomputed from `body`; a Content-Digest header sent
// by the client is informational.
struct RequestView {
  std::string method;
  std::string path;
  std::string authorization;
  std::string body;
  std::string signature_input;  // "Signature-Input" header value
  std::string signature;        // "Signature" header value
  std::string shim_checksum;    // "X-Shim-Checksum" header value
};

// Verifier-side trust anchors, typically refreshed from the issuer's
// /.well-known endpoints.
struct TrustMaterial {
  std::string expected_issuer;
  std::string expected_audience;
  token::TrustedKeys issuer_keys;
  std::map<std::string, token::Checksum> shim_versions;  // version → shim artifact checksum
  std::int64_t pop_max_skew = 60;
};

struct Decision {
  bool allowed = false;
  std::string deny_reason;  // empty when allowed
  // Populated as soon as the payload authenticated (signature + audience +
  // lifetime good), so deny decisions past that point still identify the
  // caller for the audit log.
  std::optional<token::TokenClaims> claims;
  int http_status = 401;  // 200 allow; 403 policy denials; 401 everything else
};

// Runs the full ordered pipeline. The replay cache is consulted and updated
// only once the proof-of-possession signature has verified, so requests
// denied earlier never burn their signature value; a request that got as far
// as the shim check has been seen, and re-presenting the identical signature
// afterwards counts as a replay. Any internal exception is treated as
// malformed input and denied — never allowed.
Decision verify_request(const RequestView& request, const EndpointPolicy& policy,
                        const TrustMaterial& trust, ReplayCache& replay, std::int64_t now);

// Splits the space-separated scope claim into a set.
std::set<std::string> scope_set(const std::string& scope);

}  // namespace ajwt::rs
