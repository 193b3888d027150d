#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/canonical.hpp"
#include "ajwt/token/checksum.hpp"
#include "ajwt/token/claims.hpp"
#include "ajwt/token/crypto.hpp"
#include "ajwt/token/jwt.hpp"
#include "ajwt/token/pop.hpp"
#include "support/ref_digest.hpp"

using namespace ajwt::token;

namespace {

std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<int> ch(32, 126);
  std::string out(len_dist(rng), '\0');
  for (char& c : out) c = static_cast<char>(ch(rng));
  return out;
}

AgentSignature planner_fixture() {
  AgentSignature sig;
  sig.prompt_template = "You are a planner. Repository: {repo}. Task: {task}.";
  sig.substitution_slots = {"repo", "task"};
  sig.tools = {{"read_manifest", "(repo: str) -> str", "Read repository manifests"}};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0.1"}};
  return sig;
}

TokenClaims intent_claims_fixture() {
  TokenClaims claims;
  claims.iss = "https://idp.example.com";
  claims.sub = "vulnerability_scanner_v2.1";
  claims.aud = "api.github.com";
  claims.iat = 1719570900;
  claims.exp = 1719571020;
  claims.jti = "token_a7b9c2d4";
  claims.scope = "read:code write:report";
  IntentClaims intent;
  intent.workflow_id = "vulnerability_assessment_v2";
  intent.workflow_step = "code_analysis";
  intent.executed_by = "static_analyzer";
  intent.initiated_by = "orchestrator";
  intent.delegation_chain = {"orchestrator", "static_analyzer"};
  intent.step_sequence_hash = compute_step_sequence_hash({"code_analysis"});
  intent.execution_context = {{"repository", "org/payment-service"},
                              {"branch", "main"},
                              {"commit", "8f3e9d2"}};
  claims.intent = intent;
  claims.agent_proof = AgentProof{agent_signature_checksum(planner_fixture()),
                                  "reg_1719570000", "2.1.0"};
  Bytes pub(32, 0);
  for (int i = 0; i < 32; ++i) pub[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  claims.cnf = PopBinding{jwk_thumbprint(pub), pub, "agent:static_analyzer#2024-06-28T09:15Z"};
  return claims;
}

}  // namespace

// ── encoding primitives ──────────────────────────────────────────────────────

TEST_CASE("hex and base64url round-trip and agree with the reference encoder") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    std::string text = random_text(rng, 80);
    Bytes data(text.begin(), text.end());
    auto hex = to_hex(data);
    auto back = from_hex(hex);
    REQUIRE(back.has_value());
    CHECK(*back == data);

    auto b64 = base64url_encode(data);
    CHECK(b64 == refdigest::ref_base64url(data.data(), data.size()));
    auto decoded = base64url_decode(b64);
    REQUIRE(decoded.has_value());
    CHECK(*decoded == data);
  }
  CHECK_FALSE(from_hex("abc").has_value());
  CHECK_FALSE(from_hex("zz").has_value());
  CHECK_FALSE(base64url_decode("a").has_value());
  CHECK_FALSE(base64url_decode("ab$c").has_value());
}

TEST_CASE("sha256 and hmac-sha256 agree with the independent reference") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    std::string msg = random_text(rng, 200);
    CHECK(to_hex(sha256(as_bytes(msg))) == refdigest::ref_sha256_hex(msg));
    std::string key = random_text(rng, 100);
    CHECK(to_hex(hmac_sha256(as_bytes(key), as_bytes(msg))) ==
          refdigest::ref_hex(refdigest::ref_hmac_sha256(key, msg)));
  }
}

// ── checksums ────────────────────────────────────────────────────────────────

TEST_CASE("checksum of empty input matches the published SHA-256 digest") {
  CHECK(compute_checksum("").to_string() ==
        "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("checksum rendering round-trips and rejects malformed text") {
  Checksum sum = compute_checksum("hello");
  auto parsed = Checksum::parse(sum.to_string());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == sum);

  CHECK_FALSE(Checksum::parse("md5:abcd").has_value());
  CHECK_FALSE(Checksum::parse("sha256:123").has_value());
  CHECK_FALSE(Checksum::parse("sha256:" + std::string(64, 'g')).has_value());
  std::string upper = sum.to_string();
  upper[10] = static_cast<char>(std::toupper(upper[10]));
  if (upper != sum.to_string()) CHECK_FALSE(Checksum::parse(upper).has_value());
}

TEST_CASE("checksum is deterministic and bit-sensitive") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    std::string msg = random_text(rng, 64) + "x";
    CHECK(compute_checksum(msg) == compute_checksum(msg));
    std::string flipped = msg;
    flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0x01);
    CHECK(compute_checksum(msg) != compute_checksum(flipped));
  }
}

// ── agent signature canonicalization ─────────────────────────────────────────

TEST_CASE("empty agent signature canonical form is the fixed empty document") {
  AgentSignature sig;
  CHECK(canonicalize_agent_signature(sig) ==
        R"({"config":{},"prompt_template":"","substitution_slots":[],"tools":[]})");
  // Digest checked through the independent reference implementation too.
  CHECK(agent_signature_checksum(sig).to_string() ==
        "sha256:" + refdigest::ref_sha256_hex(canonicalize_agent_signature(sig)));
  CHECK(agent_signature_checksum(sig).to_string() ==
        "sha256:0a41a0019c4810ceced156a71a8db6131e8c2c394af8416f7ca63b60cdb58325");
}

TEST_CASE("planner fixture checksum matches the frozen oracle digest") {
  AgentSignature sig = planner_fixture();
  CHECK(agent_signature_checksum(sig).to_string() ==
        "sha256:5504868fc05667621ed79885f9f4935df9cb849affaaf42a9fcc776b01c5a357");
  CHECK(agent_signature_checksum(sig).to_string() ==
        "sha256:" + refdigest::ref_sha256_hex(canonicalize_agent_signature(sig)));
}

TEST_CASE("canonical form is independent of tool and config ordering") {
  AgentSignature a = planner_fixture();
  a.tools.push_back({"query_osv", "(purl: str) -> list", "Query vulnerability data"});
  a.prompt_template += " Extra: {repo}.";

  AgentSignature b = a;
  std::swap(b.tools[0], b.tools[1]);
  b.config.clear();
  b.config = {{"temperature", "0.1"}, {"model", "gpt-4o"}};  // map re-sorts anyway

  CHECK(canonicalize_agent_signature(a) == canonicalize_agent_signature(b));

  AgentSignature c = a;
  c.config["model"] = "gpt-4o-mini";
  CHECK(canonicalize_agent_signature(a) != canonicalize_agent_signature(c));
}

TEST_CASE("canonicalization rejects invalid signatures") {
  AgentSignature dup = planner_fixture();
  dup.tools.push_back(dup.tools[0]);
  CHECK_THROWS_AS(canonicalize_agent_signature(dup), std::invalid_argument);

  AgentSignature missing_slot = planner_fixture();
  missing_slot.substitution_slots.push_back("unknown");
  CHECK_THROWS_AS(canonicalize_agent_signature(missing_slot), std::invalid_argument);

  AgentSignature bad_config = planner_fixture();
  bad_config.config["nested"] = nlohmann::json::array({1, 2});
  CHECK_THROWS_AS(canonicalize_agent_signature(bad_config), std::invalid_argument);
}

TEST_CASE("template placeholders are extracted in order") {
  auto slots = template_placeholders("A {x} b {y} and {x} again; {not a slot}");
  CHECK(slots == std::vector<std::string>{"x", "y", "x"});
}

// ── step sequence hash ───────────────────────────────────────────────────────

TEST_CASE("step sequence hash of the empty list matches the frozen oracle") {
  CHECK(compute_step_sequence_hash({}).to_string() ==
        "sha256:4f53cda18c2baa0c0354bb5f9a3ecbe5ed12ab4d8e11ba873c2f11161202b945");
  CHECK(compute_step_sequence_hash({"code_analysis"}).to_string() ==
        "sha256:c0edd22b926cff88ba73047eeab529942295d7c7b631e4f50b8b7d7edeea4261");
}

TEST_CASE("step sequence hash is order- and prefix-sensitive") {
  CHECK(compute_step_sequence_hash({"a", "b"}).to_string() ==
        "sha256:0473ef2dc0d324ab659d3580c1134e9d812035905c4781fdd6d529b0c6860e13");
  CHECK(compute_step_sequence_hash({"b", "a"}).to_string() ==
        "sha256:02d8bc3008a9bb0dcc4b86d7fd3428ced792355c733c19756bec5a56dc61b2c5");

  std::vector<std::string> steps;
  for (const char* next : {"intake", "scan", "classify", "patch"}) {
    auto before = compute_step_sequence_hash(steps);
    steps.emplace_back(next);
    CHECK(before != compute_step_sequence_hash(steps));
  }
}

// ── claims and chain sealing ─────────────────────────────────────────────────

TEST_CASE("claims JSON round-trips for intent and plain tokens") {
  TokenClaims claims = intent_claims_fixture();
  auto round = claims_from_json(claims_to_json(claims));
  REQUIRE(round.has_value());
  CHECK(*round == claims);

  TokenClaims plain;
  plain.iss = "https://idp.example.com";
  plain.sub = "payment_client_app";
  plain.aud = "api.github.com";
  plain.iat = 100;
  plain.exp = 200;
  plain.jti = "token_1234abcd";
  plain.scope = "repo:read";
  auto round_plain = claims_from_json(claims_to_json(plain));
  REQUIRE(round_plain.has_value());
  CHECK(*round_plain == plain);
  CHECK_FALSE(round_plain->intent.has_value());
}

TEST_CASE("claims invariants reject inconsistent delegation metadata") {
  TokenClaims claims = intent_claims_fixture();
  claims.intent->delegation_chain.clear();
  CHECK_THROWS_AS(check_claims_invariants(claims), std::invalid_argument);

  claims = intent_claims_fixture();
  claims.intent->delegation_chain = {"static_analyzer", "orchestrator"};
  CHECK_THROWS_AS(check_claims_invariants(claims), std::invalid_argument);

  claims = intent_claims_fixture();
  claims.iat = claims.exp + 1;
  CHECK_THROWS_AS(check_claims_invariants(claims), std::invalid_argument);
}

TEST_CASE("chain sealing round-trips and detects tampering") {
  std::string key_text = "test-chain-key";
  auto key = as_bytes(key_text);
  IntentClaims intent = *intent_claims_fixture().intent;

  IntentClaims sealed = seal_delegation_chain(intent, key);
  CHECK(verify_delegation_chain(sealed, key));
  CHECK_FALSE(verify_delegation_chain(intent, key));  // unsealed

  IntentClaims reordered = sealed;
  std::swap(reordered.delegation_chain[0], reordered.delegation_chain[1]);
  CHECK_FALSE(verify_delegation_chain(reordered, key));

  IntentClaims truncated = sealed;
  truncated.delegation_chain.pop_back();
  CHECK_FALSE(verify_delegation_chain(truncated, key));

  std::string other = "other-key";
  CHECK_FALSE(verify_delegation_chain(sealed, as_bytes(other)));
}

TEST_CASE("chain tag equals the frozen HMAC oracle value") {
  std::string key_text = "test-chain-key";
  IntentClaims intent = *intent_claims_fixture().intent;
  IntentClaims sealed = seal_delegation_chain(intent, as_bytes(key_text));
  CHECK(sealed.chain_tag ==
        "8348f0f0b1c608d7754e0e918dff129b9b5d8e1a1e35d41baa5275718f30e071");

  // Same value through the reference HMAC over the documented seal input.
  nlohmann::json doc{{"delegation_chain", intent.delegation_chain},
                     {"step_sequence_hash", intent.step_sequence_hash.to_string()},
                     {"workflow_id", intent.workflow_id}};
  CHECK(sealed.chain_tag ==
        refdigest::ref_hex(refdigest::ref_hmac_sha256(key_text, canonical_dump(doc))));
}

// ── JWT mint / verify ────────────────────────────────────────────────────────

TEST_CASE("mint then verify returns the original claims") {
  IssuerKey issuer = IssuerKey::generate("idp_key_2024");
  TrustedKeys trusted{{issuer.kid, issuer.key}};
  TokenClaims claims = intent_claims_fixture();

  std::string token = mint_token(claims, issuer);
  auto result = verify_token(token, trusted, claims.iss, claims.aud, claims.iat + 5);
  REQUIRE(result.ok());
  CHECK(result.claims == claims);

  auto decoded = decode_token_unverified(token);
  REQUIRE(decoded.has_value());
  CHECK((*decoded).header["alg"] == "RS256");
  CHECK((*decoded).header["kid"] == "idp_key_2024");
  CHECK((*decoded).payload["intent"]["workflow_id"] == "vulnerability_assessment_v2");
}

TEST_CASE("verification rejects expiry, audience, issuer, and unknown keys") {
  IssuerKey issuer = IssuerKey::generate("idp_key_2024");
  TrustedKeys trusted{{issuer.kid, issuer.key}};
  TokenClaims claims = intent_claims_fixture();
  std::string token = mint_token(claims, issuer);

  CHECK(verify_token(token, trusted, claims.iss, claims.aud, claims.exp).error ==
        TokenError::expired);
  CHECK(verify_token(token, trusted, claims.iss, claims.aud, claims.iat - 61).error ==
        TokenError::expired);
  CHECK(verify_token(token, trusted, claims.iss, "other.example", claims.iat + 1).error ==
        TokenError::wrong_audience);
  CHECK(verify_token(token, trusted, "https://evil.example", claims.aud, claims.iat + 1).error ==
        TokenError::wrong_issuer);

  TrustedKeys other{{"other_kid", IssuerKey::generate("other_kid").key}};
  CHECK(verify_token(token, other, claims.iss, claims.aud, claims.iat + 1).error ==
        TokenError::bad_signature);
  CHECK(verify_token("not-a-token", trusted, claims.iss, claims.aud, 0).error ==
        TokenError::malformed);
  CHECK(verify_token("a.b", trusted, claims.iss, claims.aud, 0).error == TokenError::malformed);
}

TEST_CASE("any single-byte mutation of a token fails verification") {
  IssuerKey issuer = IssuerKey::generate("idp_key_2024");
  TrustedKeys trusted{{issuer.kid, issuer.key}};
  TokenClaims claims = intent_claims_fixture();
  std::string token = mint_token(claims, issuer);

  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> pos_dist(0, token.size() - 1);
  for (int i = 0; i < 100; ++i) {
    std::string mutated = token;
    std::size_t pos = pos_dist(rng);
    char replacement = mutated[pos] == 'A' ? 'B' : 'A';
    mutated[pos] = replacement;
    if (mutated == token) continue;
    auto result = verify_token(mutated, trusted, claims.iss, claims.aud, claims.iat + 5);
    CHECK_FALSE(result.ok());
  }
}

TEST_CASE("alg downgrade is rejected") {
  IssuerKey issuer = IssuerKey::generate("idp_key_2024");
  TrustedKeys trusted{{issuer.kid, issuer.key}};
  TokenClaims claims = intent_claims_fixture();
  // Forge an unsigned token claiming alg=none under a trusted kid.
  nlohmann::json header{{"alg", "none"}, {"kid", issuer.kid}, {"typ", "JWT"}};
  std::string forged = base64url_encode(as_bytes(canonical_dump(header))) + "." +
                       base64url_encode(as_bytes(canonical_dump(claims_to_json(claims)))) + ".";
  auto result = verify_token(forged, trusted, claims.iss, claims.aud, claims.iat + 5);
  CHECK(result.error == TokenError::bad_signature);
}

TEST_CASE("jwks export and import round-trips the verification key") {
  IssuerKey issuer = IssuerKey::generate("idp_key_2024");
  TokenClaims claims = intent_claims_fixture();
  std::string token = mint_token(claims, issuer);

  TrustedKeys keys = trusted_keys_from_jwks(jwks_from_issuer(issuer));
  REQUIRE(keys.count("idp_key_2024") == 1);
  CHECK(verify_token(token, keys, claims.iss, claims.aud, claims.iat + 5).ok());
}

TEST_CASE("issuer key PEM round-trips") {
  IssuerKey issuer = IssuerKey::generate("k1");
  EvpKey reloaded = rsa_private_from_pem(rsa_private_to_pem(issuer.key));
  TokenClaims claims = intent_claims_fixture();
  std::string token = mint_token(claims, IssuerKey{"k1", reloaded});
  TrustedKeys trusted{{"k1", issuer.key}};
  CHECK(verify_token(token, trusted, claims.iss, claims.aud, claims.iat + 5).ok());
}

// ── proof-of-possession signatures ───────────────────────────────────────────

TEST_CASE("jwk thumbprint is deterministic and matches the frozen oracle") {
  Bytes fixed(32);
  for (int i = 0; i < 32; ++i) fixed[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
  CHECK(jwk_thumbprint(fixed).to_string() ==
        "sha256:3fb21d2c8a624d9885688a0e4aa6d7dc9ad2ca9b3786f6786364a278ff7a5c86");
  CHECK(jwk_thumbprint(fixed) == jwk_thumbprint(fixed));

  PopKeyPair a = PopKeyPair::generate("alpha", 1719570900);
  PopKeyPair b = PopKeyPair::generate("beta", 1719570900);
  CHECK(jwk_thumbprint(a.public_key) != jwk_thumbprint(b.public_key));
  CHECK(a.kid == "agent:alpha#2024-06-28T10:35Z");
}

TEST_CASE("pop key pair seed round-trips") {
  PopKeyPair original = PopKeyPair::generate("alpha", 1719570900);
  PopKeyPair restored = PopKeyPair::from_seed(original.kid, original.seed());
  CHECK(restored.public_key == original.public_key);
}

TEST_CASE("http signature signs and verifies the covered components") {
  PopKeyPair key = PopKeyPair::generate("patcher", 1719570900);
  Checksum digest = compute_checksum(R"({"pr":"fix"})");
  std::string auth = "Bearer sometoken";
  auto headers = sign_http_request("POST", "/repo/patch", auth, digest, key, 1719570900, "n1");

  auto ok = verify_http_signature("POST", "/repo/patch", auth, digest, headers.signature_input,
                                  headers.signature, key.public_key, 1719570905, 60);
  CHECK(ok == PopStatus::ok);

  SUBCASE("different public key rejects") {
    PopKeyPair other = PopKeyPair::generate("other", 1719570900);
    CHECK(verify_http_signature("POST", "/repo/patch", auth, digest, headers.signature_input,
                                headers.signature, other.public_key, 1719570905,
                                60) == PopStatus::bad_signature);
  }
  SUBCASE("different path rejects") {
    CHECK(verify_http_signature("POST", "/repo/merge", auth, digest, headers.signature_input,
                                headers.signature, key.public_key, 1719570905,
                                60) == PopStatus::bad_signature);
  }
  SUBCASE("different body digest rejects") {
    Checksum other_digest = compute_checksum(R"({"pr":"own"})");
    CHECK(verify_http_signature("POST", "/repo/patch", auth, other_digest,
                                headers.signature_input, headers.signature, key.public_key,
                                1719570905, 60) == PopStatus::bad_signature);
  }
  SUBCASE("different token in authorization rejects") {
    CHECK(verify_http_signature("POST", "/repo/patch", "Bearer stolen", digest,
                                headers.signature_input, headers.signature, key.public_key,
                                1719570905, 60) == PopStatus::bad_signature);
  }
  SUBCASE("stale created rejects in both directions") {
    CHECK(verify_http_signature("POST", "/repo/patch", auth, digest, headers.signature_input,
                                headers.signature, key.public_key, 1719570900 + 61,
                                60) == PopStatus::stale);
    CHECK(verify_http_signature("POST", "/repo/patch", auth, digest, headers.signature_input,
                                headers.signature, key.public_key, 1719570900 - 61,
                                60) == PopStatus::stale);
  }
  SUBCASE("tampered parameters are malformed or rejected") {
    std::string tampered = headers.signature_input;
    tampered.replace(tampered.find("created="), 9, "created=9");
    auto status = verify_http_signature("POST", "/repo/patch", auth, digest, tampered,
                                        headers.signature, key.public_key, 1719570905, 60);
    CHECK(status != PopStatus::ok);
    CHECK(verify_http_signature("POST", "/repo/patch", auth, digest, "garbage",
                                headers.signature, key.public_key, 1719570905,
                                60) == PopStatus::malformed);
    CHECK(verify_http_signature("POST", "/repo/patch", auth, digest, headers.signature_input,
                                "sig=:AAAA:", key.public_key, 1719570905,
                                60) == PopStatus::malformed);
  }
}

TEST_CASE("signature input parses back to its parameters") {
  PopKeyPair key = PopKeyPair::generate("planner", 1719570900);
  auto headers = sign_http_request("GET", "/repo/manifests", "Bearer t", compute_checksum(""),
                                   key, 1719570911, "abcd1234");
  auto params = parse_signature_input(headers.signature_input);
  REQUIRE(params.has_value());
  CHECK(params->alg == "ed25519");
  CHECK(params->created == 1719570911);
  CHECK(params->keyid == key.kid);
  CHECK(params->nonce == "abcd1234");
  CHECK(params->components ==
        std::vector<std::string>{"@method", "@path", "authorization", "content-digest"});

  CHECK(sign_http_request("GET", "/x", "Bearer t", compute_checksum(""), key, 1, "n")
            .signature_input.starts_with("sig=(\"@method\""));
  CHECK_THROWS_AS(sign_http_request("GET", "/x", "", compute_checksum(""), key, 1, "n"),
                  std::invalid_argument);
}
