#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ajwt/token/checksum.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::token {

// The intent object: which workflow/step this token authorizes, who executes
// it, and the delegation sequence that led here.
struct IntentClaims {
  std::string workflow_id;
  std::string workflow_step;
  std::string executed_by;
  std::string initiated_by;
  std::vector<std::string> delegation_chain;  // first == initiated_by, last == executed_by
  Checksum step_sequence_hash;
  std::map<std::string, std::string> execution_context;
  std::string chain_tag;  // lowercase-hex HMAC over the delegation fields; empty = unsealed

  bool operator==(const IntentClaims&) const = default;
};

// Binds the token to one registered agent build.
struct AgentProof {
  Checksum agent_checksum;
  std::string registration_id;
  std::string version;

  bool operator==(const AgentProof&) const = default;
};

// cnf claim: proof-of-possession binding. jkt is the thumbprint the resource
// server matches; the registered Ed25519 public key travels alongside as a
// jwk member so the verifier needs no out-of-band key fetch.
struct PopBinding {
  Checksum jkt;
  Bytes public_key;  // raw Ed25519 public key (32 bytes)
  std::string kid;

  bool operator==(const PopBinding&) const = default;
};

struct TokenClaims {
  std::string iss;
  std::string sub;
  std::string aud;
  std::int64_t exp = 0;
  std::int64_t iat = 0;
  std::string jti;
  std::string scope;  // space-separated
  std::optional<IntentClaims> intent;       // absent for plain access tokens
  std::optional<AgentProof> agent_proof;    // absent for plain access tokens
  std::optional<PopBinding> cnf;            // absent for plain access tokens

  bool operator==(const TokenClaims&) const = default;
};

// Throws std::invalid_argument when an invariant fails (empty chain, chain
// endpoints not matching initiated_by/executed_by, iat > exp).
void check_claims_invariants(const TokenClaims& claims);

nlohmann::json claims_to_json(const TokenClaims& claims);
// Returns nullopt when required members are missing or badly typed.
std::optional<TokenClaims> claims_from_json(const nlohmann::json& payload);

Checksum compute_step_sequence_hash(const std::vector<std::string>& executed_steps);

// chain_tag = HMAC-SHA-256 over the canonical encoding of
// {delegation_chain, step_sequence_hash, workflow_id}, rendered lowercase hex.
IntentClaims seal_delegation_chain(const IntentClaims& intent,
                                   std::span<const std::uint8_t> chain_key);
bool verify_delegation_chain(const IntentClaims& intent, std::span<const std::uint8_t> chain_key);

}  // namespace ajwt::token
