#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include "ajwt/rs/decision_log.hpp"
#include "ajwt/rs/http_server.hpp"
#include "ajwt/rs/policy.hpp"
#include "ajwt/rs/replay.hpp"
#include "ajwt/rs/trust.hpp"
#include "ajwt/rs/verify.hpp"
#include "support/fixtures.hpp"
#include "support/ref_digest.hpp"

using namespace ajwt;
using namespace ajwt::rs;
using fixtures::kEpoch;
using fixtures::kWorkflowId;

namespace {

// The enforcement side of the fixture deployment: trust anchors exported by
// the seeded issuer, plus minted tokens and signed requests for its agents.
struct RsFixture {
  fixtures::SeededIdp idp = fixtures::make_seeded_idp([] { return kEpoch; });
  TrustMaterial trust;

  RsFixture() {
    trust.expected_issuer = "https://idp.example.com";
    trust.expected_audience = "api.github.com";
    trust.issuer_keys = token::trusted_keys_from_jwks(idp.service->jwks());
    trust.shim_versions = idp.service->well_known_shim_versions();
  }

  idp::TokenOutcome mint_fetch_token() {
    auto outcome = idp.service->issue_intent_token(fixtures::fetch_request(idp));
    REQUIRE(outcome.issued);
    return outcome;
  }
};

EndpointPolicy vuln_query_policy() {
  EndpointPolicy policy;
  policy.method = "GET";
  policy.route = "/vuln/query";
  policy.required_scopes = {"vuln:read"};
  policy.allowed_workflow_steps = {{kWorkflowId, "fetch_vulnerabilities"}};
  policy.require_intent = true;
  return policy;
}

EndpointPolicy legacy_status_policy() {
  EndpointPolicy policy;
  policy.method = "GET";
  policy.route = "/legacy/status";
  policy.required_scopes = {"repo:read"};
  policy.require_intent = false;
  return policy;
}

RequestView signed_request(const std::string& method, const std::string& path,
                           const std::string& bearer, const std::string& body,
                           const token::PopKeyPair& key, std::int64_t created,
                           const std::string& nonce, const std::string& shim_checksum) {
  RequestView view;
  view.method = method;
  view.path = path;
  view.authorization = "Bearer " + bearer;
  view.body = body;
  auto headers = token::sign_http_request(method, path, view.authorization,
                                          token::compute_checksum(body), key, created, nonce);
  view.signature_input = headers.signature_input;
  view.signature = headers.signature;
  view.shim_checksum = shim_checksum;
  return view;
}

// A fully valid fetch_vulnerabilities request against /vuln/query.
RequestView golden_request(RsFixture& fx, const idp::TokenOutcome& outcome,
                           std::int64_t created, const std::string& nonce = "n-1") {
  return signed_request("GET", "/vuln/query", outcome.access_token, "", fx.idp.pop_keys.at("planner"),
                        created, nonce, fx.idp.shim_checksum.to_string());
}

}  // namespace

// ---------------------------------------------------------------------------
// Scope splitting

TEST_CASE("scope_set splits on spaces") {
  CHECK(scope_set("") == std::set<std::string>{});
  CHECK(scope_set("repo:read") == std::set<std::string>{"repo:read"});
  CHECK(scope_set("repo:read vuln:read") == std::set<std::string>{"repo:read", "vuln:read"});
  CHECK(scope_set("  a   b  ") == std::set<std::string>{"a", "b"});
}

// ---------------------------------------------------------------------------
// Endpoint policy matching and config round-trip

TEST_CASE("endpoint policy matches exact routes and prefixes") {
  EndpointPolicy exact{"GET", "/vuln/query", {}, {}, true};
  CHECK(exact.matches("GET", "/vuln/query"));
  CHECK_FALSE(exact.matches("POST", "/vuln/query"));
  CHECK_FALSE(exact.matches("GET", "/vuln/query/extra"));

  EndpointPolicy prefix{"POST", "/repos/*", {}, {}, true};
  CHECK(prefix.matches("POST", "/repos/org/payment-service/patches"));
  CHECK(prefix.matches("POST", "/repos/"));
  CHECK_FALSE(prefix.matches("POST", "/repos"));
  CHECK_FALSE(prefix.matches("POST", "/repositories/x"));
}

TEST_CASE("policy config selects the first matching entry") {
  PolicyConfig config;
  config.endpoints = {vuln_query_policy(), legacy_status_policy(),
                      EndpointPolicy{"GET", "/vuln/*", {"vuln:read"}, {}, false}};
  const EndpointPolicy* hit = config.match("GET", "/vuln/query");
  REQUIRE(hit != nullptr);
  CHECK(hit->require_intent);  // exact entry listed first wins over the prefix
  hit = config.match("GET", "/vuln/other");
  REQUIRE(hit != nullptr);
  CHECK_FALSE(hit->require_intent);
  CHECK(config.match("DELETE", "/vuln/query") == nullptr);
}

TEST_CASE("policy config survives a JSON round-trip") {
  PolicyConfig config;
  config.endpoints = {vuln_query_policy(), legacy_status_policy()};
  auto parsed = PolicyConfig::from_json(config.to_json());
  REQUIRE(parsed.has_value());
  REQUIRE(parsed->endpoints.size() == 2);
  CHECK(parsed->endpoints[0].method == "GET");
  CHECK(parsed->endpoints[0].route == "/vuln/query");
  CHECK(parsed->endpoints[0].required_scopes == std::set<std::string>{"vuln:read"});
  CHECK(parsed->endpoints[0].allowed_workflow_steps ==
        std::set<std::pair<std::string, std::string>>{{kWorkflowId, "fetch_vulnerabilities"}});
  CHECK(parsed->endpoints[0].require_intent);
  CHECK_FALSE(parsed->endpoints[1].require_intent);

  CHECK_FALSE(PolicyConfig::from_json(nlohmann::json::array()).has_value());
  CHECK_FALSE(PolicyConfig::from_json({{"endpoints", 7}}).has_value());
  CHECK_FALSE(
      PolicyConfig::from_json({{"endpoints", {{{"method", "GET"}}}}}).has_value());
}

// ---------------------------------------------------------------------------
// Replay cache

TEST_CASE("replay cache remembers exact (jti, signature) pairs until expiry") {
  ReplayCache cache;
  CHECK(cache.insert_if_absent("jti-1", "sig-a", kEpoch + 120));
  CHECK_FALSE(cache.insert_if_absent("jti-1", "sig-a", kEpoch + 120));
  // Same token, different signed request: not a replay.
  CHECK(cache.insert_if_absent("jti-1", "sig-b", kEpoch + 120));
  // Same signature bytes under a different token: not a replay either.
  CHECK(cache.insert_if_absent("jti-2", "sig-a", kEpoch + 200));
  CHECK(cache.size() == 3);

  cache.evict_expired(kEpoch + 120);  // evicts entries whose token lifetime ended
  CHECK(cache.size() == 1);
  // Post-eviction the pair is insertable again; the token itself is expired
  // by now, so the earlier pipeline stage already rejects such requests.
  CHECK(cache.insert_if_absent("jti-1", "sig-a", kEpoch + 120));
}

// ---------------------------------------------------------------------------
// The golden path

TEST_CASE("minted token with matching PoP signature is allowed") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  RequestView request = golden_request(fx, outcome, kEpoch + 1);

  Decision decision = verify_request(request, vuln_query_policy(), fx.trust, replay, kEpoch + 2);
  REQUIRE(decision.allowed);
  CHECK(decision.deny_reason.empty());
  CHECK(decision.http_status == 200);
  REQUIRE(decision.claims.has_value());
  CHECK(decision.claims->jti == outcome.claims.jti);
  REQUIRE(decision.claims->intent.has_value());
  CHECK(decision.claims->intent->workflow_step == "fetch_vulnerabilities");
  CHECK(decision.claims->intent->executed_by == "planner");
}

TEST_CASE("one token authorizes many distinct signed requests") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  for (int i = 0; i < 5; ++i) {
    RequestView request = golden_request(fx, outcome, kEpoch + 1 + i, "nonce-" + std::to_string(i));
    Decision decision =
        verify_request(request, vuln_query_policy(), fx.trust, replay, kEpoch + 2 + i);
    CHECK(decision.allowed);
  }
  CHECK(replay.size() == 5);
}

// ---------------------------------------------------------------------------
// Deny reasons, in pipeline order

TEST_CASE("deny 1: malformed_token") {
  RsFixture fx;
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();

  RequestView request;  // no Authorization header at all
  request.method = "GET";
  request.path = "/vuln/query";
  Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyMalformedToken);
  CHECK(decision.http_status == 401);

  for (const char* authorization :
       {"Token abc", "Bearer", "Bearer ", "Bearer not-a-jwt", "Bearer a.b", "Bearer a.b.c.d"}) {
    request.authorization = authorization;
    decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyMalformedToken);
  }
}

TEST_CASE("deny 2: bad_signature covers forgeries, tampering, and foreign issuers") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();

  SUBCASE("token signed by an untrusted key") {
    auto rogue = token::IssuerKey::generate("idp_key_2024");  // same kid, different key
    token::TokenClaims claims = outcome.claims;
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.authorization = "Bearer " + token::mint_token(claims, rogue);
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyBadSignature);
  }

  SUBCASE("payload tampered after signing") {
    std::string tampered = outcome.access_token;
    std::size_t dot = tampered.find('.');
    tampered[dot + 10] = tampered[dot + 10] == 'A' ? 'B' : 'A';
    RequestView request;
    request.method = "GET";
    request.path = "/vuln/query";
    request.authorization = "Bearer " + tampered;
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyBadSignature);
  }

  SUBCASE("issuer string not the trusted issuer maps to bad_signature") {
    auto local = token::IssuerKey::generate("local");
    TrustMaterial trust = fx.trust;
    trust.issuer_keys = token::trusted_keys_from_jwks(token::jwks_from_issuer(local));
    token::TokenClaims claims = outcome.claims;
    claims.iss = "https://evil.example.com";
    RequestView request;
    request.method = "GET";
    request.path = "/vuln/query";
    request.authorization = "Bearer " + token::mint_token(claims, local);
    Decision decision = verify_request(request, policy, trust, replay, kEpoch + 1);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyBadSignature);
  }
}

TEST_CASE("deny 3: expired outranks later reasons and covers future iat") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();

  SUBCASE("past expiry") {
    RequestView request = golden_request(fx, outcome, kEpoch + 120);
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 120);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyExpired);
  }

  SUBCASE("token from the future") {
    RequestView request = golden_request(fx, outcome, kEpoch - 5);
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch - 5);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyExpired);
  }

  SUBCASE("expired and wrong audience together report expired") {
    auto local = token::IssuerKey::generate("local");
    TrustMaterial trust = fx.trust;
    trust.issuer_keys = token::trusted_keys_from_jwks(token::jwks_from_issuer(local));
    token::TokenClaims claims = outcome.claims;
    claims.aud = "other.example.com";
    RequestView request;
    request.method = "GET";
    request.path = "/vuln/query";
    request.authorization = "Bearer " + token::mint_token(claims, local);
    Decision decision = verify_request(request, policy, trust, replay, claims.exp + 30);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyExpired);
  }
}

TEST_CASE("deny 4: wrong_audience") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  TrustMaterial trust = fx.trust;
  trust.expected_audience = "api.other-resource.example";
  RequestView request = golden_request(fx, outcome, kEpoch + 1);
  Decision decision = verify_request(request, vuln_query_policy(), trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyWrongAudience);
}

TEST_CASE("deny 5: scope_insufficient is a 403 and carries claims for the log") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();
  policy.required_scopes = {"repo:write"};  // fetch token only holds vuln:read
  RequestView request = golden_request(fx, outcome, kEpoch + 1);
  Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyScopeInsufficient);
  CHECK(decision.http_status == 403);
  REQUIRE(decision.claims.has_value());
  CHECK(decision.claims->jti == outcome.claims.jti);
}

TEST_CASE("deny 6: intent_missing rejects plain tokens on intent-mandatory routes") {
  RsFixture fx;
  ReplayCache replay;
  auto plain = fx.idp.service->issue_access_token(fx.idp.client_id, fx.idp.client_secret,
                                                  std::set<std::string>{"vuln:read"},
                                                  "api.github.com");
  REQUIRE(plain.issued);
  RequestView request;
  request.method = "GET";
  request.path = "/vuln/query";
  request.authorization = "Bearer " + plain.access_token;
  Decision decision = verify_request(request, vuln_query_policy(), fx.trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyIntentMissing);
  CHECK(decision.http_status == 401);

  // Insufficient scope on the same plain token is reported first.
  EndpointPolicy heavier = vuln_query_policy();
  heavier.required_scopes = {"vuln:read", "repo:write"};
  decision = verify_request(request, heavier, fx.trust, replay, kEpoch + 1);
  CHECK(decision.deny_reason == kDenyScopeInsufficient);
}

TEST_CASE("deny 7: step_not_allowed_for_endpoint") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;

  SUBCASE("endpoint mapped to a different step") {
    EndpointPolicy policy = vuln_query_policy();
    policy.allowed_workflow_steps = {{kWorkflowId, "classify_ecosystems"}};
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyStepNotAllowedForEndpoint);
    CHECK(decision.http_status == 403);
  }

  SUBCASE("legacy route that still pins steps constrains intent tokens") {
    EndpointPolicy policy = legacy_status_policy();
    policy.required_scopes = {"vuln:read"};
    policy.allowed_workflow_steps = {{kWorkflowId, "intake"}};
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.method = "GET";
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyStepNotAllowedForEndpoint);
  }

  SUBCASE("a bad shim header does not mask the step violation") {
    EndpointPolicy policy = vuln_query_policy();
    policy.allowed_workflow_steps = {{kWorkflowId, "merge_pr"}};
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.shim_checksum = "sha256:not-a-digest";
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyStepNotAllowedForEndpoint);
  }
}

TEST_CASE("deny 8: pop_thumbprint_mismatch when cnf_jkt names a different key") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;

  auto local = token::IssuerKey::generate("local");
  TrustMaterial trust = fx.trust;
  trust.issuer_keys = token::trusted_keys_from_jwks(token::jwks_from_issuer(local));

  token::TokenClaims claims = outcome.claims;
  auto other_key = token::PopKeyPair::generate("imposter", kEpoch);
  claims.cnf->jkt = token::jwk_thumbprint(other_key.public_key);  // key stays the planner's

  std::string bearer = token::mint_token(claims, local);
  RequestView request = signed_request("GET", "/vuln/query", bearer, "",
                                       fx.idp.pop_keys.at("planner"), kEpoch + 1, "n-1",
                                       fx.idp.shim_checksum.to_string());
  Decision decision = verify_request(request, vuln_query_policy(), trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyPopThumbprintMismatch);
}

TEST_CASE("deny 9: pop_signature_invalid") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();

  SUBCASE("signature headers missing entirely") {
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.signature_input.clear();
    request.signature.clear();
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyPopSignatureInvalid);
  }

  SUBCASE("signed by another agent's key") {
    RequestView request = signed_request("GET", "/vuln/query", outcome.access_token, "",
                                         fx.idp.pop_keys.at("classifier"), kEpoch + 1, "n-1",
                                         fx.idp.shim_checksum.to_string());
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyPopSignatureInvalid);
  }

  SUBCASE("body tampered after signing") {
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.body = "{\"extra\":\"payload\"}";
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyPopSignatureInvalid);
  }

  SUBCASE("request replayed against a different path") {
    // Signed for /vuln/query, presented to another route: the rebuilt base
    // uses the actual path, so the signature no longer fits.
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.path = "/vuln/export";
    EndpointPolicy elsewhere = policy;
    elsewhere.route = "/vuln/export";
    Decision decision = verify_request(request, elsewhere, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyPopSignatureInvalid);
  }

  SUBCASE("garbage Signature-Input header") {
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.signature_input = "sig=(\"@method\");alg=\"rsa\"";
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
    CHECK(decision.deny_reason == kDenyPopSignatureInvalid);
  }
}

TEST_CASE("deny 10: pop_stale when created drifts beyond max_skew") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  // Signed at mint time, presented 90 s later: token still live (120 s), but
  // the signature exceeds the 60 s freshness window.
  RequestView request = golden_request(fx, outcome, kEpoch + 1);
  Decision decision = verify_request(request, vuln_query_policy(), fx.trust, replay, kEpoch + 91);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyPopStale);

  // Within the window the same signature is fine.
  decision = verify_request(request, vuln_query_policy(), fx.trust, replay, kEpoch + 45);
  CHECK(decision.allowed);
}

TEST_CASE("deny 11: jti_replayed on exact re-presentation only") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;
  EndpointPolicy policy = vuln_query_policy();

  RequestView request = golden_request(fx, outcome, kEpoch + 1, "nonce-one");
  CHECK(verify_request(request, policy, fx.trust, replay, kEpoch + 2).allowed);

  Decision replayed = verify_request(request, policy, fx.trust, replay, kEpoch + 3);
  CHECK_FALSE(replayed.allowed);
  CHECK(replayed.deny_reason == kDenyJtiReplayed);
  CHECK(replayed.http_status == 401);

  // Same token re-signed with a fresh nonce is a new request, not a replay.
  RequestView fresh = golden_request(fx, outcome, kEpoch + 3, "nonce-two");
  CHECK(verify_request(fresh, policy, fx.trust, replay, kEpoch + 4).allowed);

  // And the replayed copy still denies afterwards.
  CHECK(verify_request(request, policy, fx.trust, replay, kEpoch + 5).deny_reason ==
        kDenyJtiReplayed);
}

TEST_CASE("deny 12: shim_checksum_invalid for absent, malformed, or unknown builds") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  EndpointPolicy policy = vuln_query_policy();

  auto check_denied = [&](const std::string& header_value) {
    ReplayCache replay;  // fresh cache: the PoP stage must pass, not replay-deny
    RequestView request = golden_request(fx, outcome, kEpoch + 1);
    request.shim_checksum = header_value;
    Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 2);
    CHECK_FALSE(decision.allowed);
    CHECK(decision.deny_reason == kDenyShimChecksumInvalid);
  };
  check_denied("");
  check_denied("sha256:zz");
  check_denied(token::compute_checksum("some unpublished shim build").to_string());
}

// ---------------------------------------------------------------------------
// Legacy path

TEST_CASE("legacy route accepts plain tokens and skips agent-era checks") {
  RsFixture fx;
  ReplayCache replay;
  auto plain = fx.idp.service->issue_access_token(fx.idp.client_id, fx.idp.client_secret,
                                                  std::set<std::string>{"repo:read"},
                                                  "api.github.com");
  REQUIRE(plain.issued);

  RequestView request;
  request.method = "GET";
  request.path = "/legacy/status";
  request.authorization = "Bearer " + plain.access_token;
  EndpointPolicy policy = legacy_status_policy();

  Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
  CHECK(decision.allowed);
  REQUIRE(decision.claims.has_value());
  CHECK_FALSE(decision.claims->intent.has_value());

  // No PoP, no replay protection: the identical request sails through again.
  CHECK(verify_request(request, policy, fx.trust, replay, kEpoch + 2).allowed);
  CHECK(replay.size() == 0);

  // Scope still enforced on the legacy path.
  EndpointPolicy heavier = policy;
  heavier.required_scopes = {"repo:write"};
  CHECK(verify_request(request, heavier, fx.trust, replay, kEpoch + 3).deny_reason ==
        kDenyScopeInsufficient);
}

TEST_CASE("intent token on a legacy route passes on scope alone, with PoP still enforced") {
  RsFixture fx;
  auto outcome = fx.mint_fetch_token();
  ReplayCache replay;

  EndpointPolicy policy = legacy_status_policy();
  policy.required_scopes = {"vuln:read"};

  RequestView request = signed_request("GET", "/legacy/status", outcome.access_token, "",
                                       fx.idp.pop_keys.at("planner"), kEpoch + 1, "n-1",
                                       fx.idp.shim_checksum.to_string());
  Decision decision = verify_request(request, policy, fx.trust, replay, kEpoch + 1);
  CHECK(decision.allowed);

  // The token is still key-bound: replaying it on the legacy route denies.
  CHECK(verify_request(request, policy, fx.trust, replay, kEpoch + 2).deny_reason ==
        kDenyJtiReplayed);
}

// ---------------------------------------------------------------------------
// Fail-closed behavior

TEST_CASE("an exception inside verification denies, never allows") {
  RsFixture fx;
  ReplayCache replay;

  // Hand-craft a key-bound token whose cnf key is 5 bytes: thumbprinting it
  // inside the pipeline throws. The failure must surface as a deny.
  auto local = token::IssuerKey::generate("local");
  TrustMaterial trust = fx.trust;
  trust.issuer_keys = token::trusted_keys_from_jwks(token::jwks_from_issuer(local));

  auto outcome = fx.mint_fetch_token();
  token::TokenClaims claims = outcome.claims;
  claims.cnf->public_key = {1, 2, 3, 4, 5};
  std::string bearer = token::mint_token(claims, local);

  RequestView request = signed_request("GET", "/vuln/query", bearer, "",
                                       fx.idp.pop_keys.at("planner"), kEpoch + 1, "n-1",
                                       fx.idp.shim_checksum.to_string());
  Decision decision = verify_request(request, vuln_query_policy(), trust, replay, kEpoch + 1);
  CHECK_FALSE(decision.allowed);
  CHECK(decision.deny_reason == kDenyMalformedToken);
}

// ---------------------------------------------------------------------------
// Decision log

TEST_CASE("decision log chains and detects tampering") {
  std::vector<DecisionRecord> records;
  DecisionChainHead head;
  CHECK(verify_decision_chain(records, head));

  for (int i = 0; i < 8; ++i) {
    DecisionRecord record;
    record.timestamp = kEpoch + i;
    record.method = i % 2 ? "POST" : "GET";
    record.path = "/vuln/query";
    record.outcome = i % 3 ? "allowed" : "denied:jti_replayed";
    record.jti = "token_" + std::to_string(i);
    record.agent_id = "planner";
    record.step = "fetch_vulnerabilities";
    decision_append(records, head, std::move(record));
  }
  REQUIRE(records.size() == 8);
  CHECK(verify_decision_chain(records, head));
  CHECK(head.sequence_no == 8);

  SUBCASE("rewriting an outcome breaks the chain") {
    auto tampered = records;
    REQUIRE(tampered[3].outcome == "denied:jti_replayed");
    tampered[3].outcome = "allowed";
    CHECK_FALSE(verify_decision_chain(tampered, head));
  }
  SUBCASE("dropping the newest record is caught by the head") {
    auto truncated = records;
    truncated.pop_back();
    CHECK_FALSE(verify_decision_chain(truncated, head));
  }
  SUBCASE("reordering breaks the chain") {
    auto reordered = records;
    std::swap(reordered[2], reordered[5]);
    CHECK_FALSE(verify_decision_chain(reordered, head));
  }
  SUBCASE("records survive a JSON round-trip") {
    for (const DecisionRecord& record : records) {
      DecisionRecord copy = DecisionRecord::from_json(record.to_json());
      CHECK(copy.sequence_no == record.sequence_no);
      CHECK(copy.outcome == record.outcome);
      CHECK(copy.entry_hash == record.entry_hash);
      CHECK(copy.prev_entry_hash == record.prev_entry_hash);
    }
  }
  SUBCASE("entry hashes agree with an independent recomputation") {
    std::string prev;
    for (std::size_t i = 0; i < records.size(); ++i) {
      nlohmann::json body{{"agent_id", records[i].agent_id},
                          {"jti", records[i].jti},
                          {"method", records[i].method},
                          {"outcome", records[i].outcome},
                          {"path", records[i].path},
                          {"sequence_no", records[i].sequence_no},
                          {"step", records[i].step},
                          {"timestamp", records[i].timestamp}};
      std::string prev_hex =
          i == 0 ? "sha256:" + refdigest::ref_sha256_hex("") : prev;
      std::string expected = "sha256:" + refdigest::ref_sha256_hex(prev_hex + body.dump());
      CHECK(records[i].entry_hash.to_string() == expected);
      prev = expected;
    }
  }
}

// ---------------------------------------------------------------------------
// Trust store client

TEST_CASE("trust store caches within TTL and survives issuer outages") {
  RsFixture fx;
  int calls = 0;
  bool fail = false;
  JsonFetcher fetcher = [&](const std::string& path) -> std::optional<nlohmann::json> {
    ++calls;
    if (fail) return std::nullopt;
    if (path == "/.well-known/jwks") return fx.idp.service->jwks();
    if (path == "/.well-known/shim-versions") {
      nlohmann::json versions = nlohmann::json::object();
      for (const auto& [version, checksum] : fx.idp.service->well_known_shim_versions())
        versions[version] = checksum.to_string();
      return nlohmann::json{{"versions", versions}};
    }
    return std::nullopt;
  };

  TrustStoreClient store(fetcher, "https://idp.example.com", "api.github.com", 300);
  TrustMaterial material = store.material(kEpoch);
  CHECK(calls == 2);  // jwks + shim-versions
  CHECK(material.issuer_keys.size() == 1);
  CHECK(material.shim_versions.at(fixtures::kShimVersion) == fx.idp.shim_checksum);
  CHECK(store.refresh_count() == 1);

  // Within TTL: served from cache, no fetches.
  store.material(kEpoch + 299);
  CHECK(calls == 2);

  // Past TTL with the issuer down: the stale snapshot keeps serving.
  fail = true;
  TrustMaterial stale = store.material(kEpoch + 301);
  CHECK(stale.issuer_keys.size() == 1);
  CHECK(store.refresh_count() == 1);

  // Issuer back up: refreshed on the next lapse.
  fail = false;
  store.material(kEpoch + 700);
  CHECK(store.refresh_count() == 2);

  // A store that never fetched anything and cannot reach the issuer throws.
  TrustStoreClient cold([](const std::string&) { return std::nullopt; },
                        "https://idp.example.com", "api.github.com", 300);
  CHECK_THROWS_AS(cold.material(kEpoch), std::runtime_error);
}

// ---------------------------------------------------------------------------
// Verified tokens round-trip through the policy decision with real HTTP

TEST_CASE("http adapter guards routes, logs decisions, and serves introspection") {
  RsFixture fx;
  std::int64_t now = kEpoch + 1;

  PolicyConfig config;
  config.endpoints = {vuln_query_policy(), legacy_status_policy()};

  RsHttpServer server(config, [&fx](std::int64_t) { return fx.trust; },
                      [&now] { return now; });
  server.route("GET", "/vuln/query", [](const httplib::Request&, httplib::Response& res,
                                        const token::TokenClaims& claims) {
    res.set_content(nlohmann::json{{"vulns", nlohmann::json::array()},
                                   {"for_step", claims.intent->workflow_step}}
                        .dump(),
                    "application/json");
  });
  server.route("GET", "/unpolicied/route",
               [](const httplib::Request&, httplib::Response& res, const token::TokenClaims&) {
                 res.set_content("{}", "application/json");
               });
  int port = server.start();
  httplib::Client client("127.0.0.1", port);

  auto outcome = fx.mint_fetch_token();
  RequestView signed_view = golden_request(fx, outcome, now, "http-n1");

  httplib::Headers headers{{"Authorization", signed_view.authorization},
                           {"Signature-Input", signed_view.signature_input},
                           {"Signature", signed_view.signature},
                           {"X-Shim-Checksum", signed_view.shim_checksum}};

  auto ok = client.Get("/vuln/query", headers);
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(nlohmann::json::parse(ok->body)["for_step"] == "fetch_vulnerabilities");

  // Identical bytes again: replay.
  auto replayed = client.Get("/vuln/query", headers);
  REQUIRE(replayed);
  CHECK(replayed->status == 401);
  CHECK(nlohmann::json::parse(replayed->body)["reason"] == "jti_replayed");

  // No token at all.
  auto bare = client.Get("/vuln/query");
  REQUIRE(bare);
  CHECK(bare->status == 401);
  CHECK(nlohmann::json::parse(bare->body)["reason"] == "malformed_token");

  // Handler registered but no policy entry covers it: fail closed.
  auto unpolicied = client.Get("/unpolicied/route", headers);
  REQUIRE(unpolicied);
  CHECK(unpolicied->status == 403);
  CHECK(nlohmann::json::parse(unpolicied->body)["reason"] == "unpolicied_route");

  // Decision log recorded all four, in order, and chains.
  auto decisions = server.decisions();
  REQUIRE(decisions.size() == 4);
  CHECK(decisions[0].outcome == "allowed");
  CHECK(decisions[0].jti == outcome.claims.jti);
  CHECK(decisions[0].agent_id == "planner");
  CHECK(decisions[0].step == "fetch_vulnerabilities");
  CHECK(decisions[1].outcome == "denied:jti_replayed");
  CHECK(decisions[2].outcome == "denied:malformed_token");
  CHECK(decisions[2].jti.empty());
  CHECK(decisions[3].outcome == "denied:unpolicied_route");
  CHECK(server.verify_decision_log());

  auto verify = client.Get("/decisions/verify");
  REQUIRE(verify);
  auto verdict = nlohmann::json::parse(verify->body);
  CHECK(verdict["valid"] == true);
  CHECK(verdict["entries"] == 4);

  auto listing = client.Get("/decisions");
  REQUIRE(listing);
  CHECK(nlohmann::json::parse(listing->body)["decisions"].size() == 4);

  server.stop();
}
