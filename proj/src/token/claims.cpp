#include "ajwt/token/claims.hpp"

#include <stdexcept>

#include "ajwt/token/canonical.hpp"

namespace ajwt::token {

namespace {

std::optional<std::string> get_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<std::int64_t> get_int(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) return std::nullopt;
  return it->get<std::int64_t>();
}

nlohmann::json intent_to_json(const IntentClaims& intent) {
  nlohmann::json out{{"workflow_id", intent.workflow_id},
                     {"workflow_step", intent.workflow_step},
                     {"executed_by", intent.executed_by},
                     {"initiated_by", intent.initiated_by},
                     {"delegation_chain", intent.delegation_chain},
                     {"step_sequence_hash", intent.step_sequence_hash.to_string()},
                     {"execution_context", intent.execution_context}};
  if (!intent.chain_tag.empty()) out["chain_tag"] = intent.chain_tag;
  return out;
}

std::optional<IntentClaims> intent_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  IntentClaims intent;
  auto workflow_id = get_string(obj, "workflow_id");
  auto workflow_step = get_string(obj, "workflow_step");
  auto executed_by = get_string(obj, "executed_by");
  auto initiated_by = get_string(obj, "initiated_by");
  auto hash_text = get_string(obj, "step_sequence_hash");
  if (!workflow_id || !workflow_step || !executed_by || !initiated_by || !hash_text)
    return std::nullopt;
  auto hash = Checksum::parse(*hash_text);
  if (!hash) return std::nullopt;
  auto chain = obj.find("delegation_chain");
  if (chain == obj.end() || !chain->is_array()) return std::nullopt;
  for (const auto& link : *chain) {
    if (!link.is_string()) return std::nullopt;
    intent.delegation_chain.push_back(link.get<std::string>());
  }
  if (auto ctx = obj.find("execution_context"); ctx != obj.end()) {
    if (!ctx->is_object()) return std::nullopt;
    for (const auto& [key, value] : ctx->items()) {
      if (!value.is_string()) return std::nullopt;
      intent.execution_context[key] = value.get<std::string>();
    }
  }
  if (auto tag = get_string(obj, "chain_tag")) intent.chain_tag = *tag;
  intent.workflow_id = *workflow_id;
  intent.workflow_step = *workflow_step;
  intent.executed_by = *executed_by;
  intent.initiated_by = *initiated_by;
  intent.step_sequence_hash = *hash;
  return intent;
}

}  // namespace

void check_claims_invariants(const TokenClaims& claims) {
  if (claims.iat > claims.exp) throw std::invalid_argument("claims: iat must not exceed exp");
  if (claims.jti.empty()) throw std::invalid_argument("claims: jti required");
  if (!claims.intent) return;
  const IntentClaims& intent = *claims.intent;
  if (intent.delegation_chain.empty())
    throw std::invalid_argument("intent: delegation_chain must be non-empty");
  if (intent.delegation_chain.front() != intent.initiated_by)
    throw std::invalid_argument("intent: chain must start at initiated_by");
  if (intent.delegation_chain.back() != intent.executed_by)
    throw std::invalid_argument("intent: chain must end at executed_by");
}

nlohmann::json claims_to_json(const TokenClaims& claims) {
  nlohmann::json out{{"iss", claims.iss}, {"sub", claims.sub}, {"aud", claims.aud},
                     {"exp", claims.exp}, {"iat", claims.iat}, {"jti", claims.jti},
                     {"scope", claims.scope}};
  if (claims.intent) out["intent"] = intent_to_json(*claims.intent);
  if (claims.agent_proof) {
    out["agent_proof"] = {{"agent_checksum", claims.agent_proof->agent_checksum.to_string()},
                          {"registration_id", claims.agent_proof->registration_id},
                          {"version", claims.agent_proof->version}};
  }
  if (claims.cnf) {
    out["cnf"] = {{"jkt", claims.cnf->jkt.to_string()},
                  {"jwk",
                   {{"crv", "Ed25519"},
                    {"kid", claims.cnf->kid},
                    {"kty", "OKP"},
                    {"x", base64url_encode(claims.cnf->public_key)}}}};
  }
  return out;
}

std::optional<TokenClaims> claims_from_json(const nlohmann::json& payload) {
  if (!payload.is_object()) return std::nullopt;
  TokenClaims claims;
  auto iss = get_string(payload, "iss");
  auto sub = get_string(payload, "sub");
  auto aud = get_string(payload, "aud");
  auto jti = get_string(payload, "jti");
  auto exp = get_int(payload, "exp");
  auto iat = get_int(payload, "iat");
  if (!iss || !sub || !aud || !jti || !exp || !iat) return std::nullopt;
  claims.iss = *iss;
  claims.sub = *sub;
  claims.aud = *aud;
  claims.jti = *jti;
  claims.exp = *exp;
  claims.iat = *iat;
  if (auto scope = get_string(payload, "scope")) claims.scope = *scope;

  if (auto it = payload.find("intent"); it != payload.end()) {
    auto intent = intent_from_json(*it);
    if (!intent) return std::nullopt;
    claims.intent = std::move(*intent);
  }
  if (auto it = payload.find("agent_proof"); it != payload.end()) {
    if (!it->is_object()) return std::nullopt;
    auto checksum_text = get_string(*it, "agent_checksum");
    auto registration_id = get_string(*it, "registration_id");
    auto version = get_string(*it, "version");
    if (!checksum_text || !registration_id || !version) return std::nullopt;
    auto checksum = Checksum::parse(*checksum_text);
    if (!checksum) return std::nullopt;
    claims.agent_proof = AgentProof{*checksum, *registration_id, *version};
  }
  if (auto it = payload.find("cnf"); it != payload.end()) {
    if (!it->is_object()) return std::nullopt;
    auto jkt_text = get_string(*it, "jkt");
    if (!jkt_text) return std::nullopt;
    auto jkt = Checksum::parse(*jkt_text);
    if (!jkt) return std::nullopt;
    PopBinding cnf;
    cnf.jkt = *jkt;
    auto jwk = it->find("jwk");
    if (jwk == it->end() || !jwk->is_object()) return std::nullopt;
    auto kty = get_string(*jwk, "kty");
    auto crv = get_string(*jwk, "crv");
    auto x = get_string(*jwk, "x");
    if (!kty || *kty != "OKP" || !crv || *crv != "Ed25519" || !x) return std::nullopt;
    auto raw = base64url_decode(*x);
    if (!raw || raw->size() != 32) return std::nullopt;
    cnf.public_key = std::move(*raw);
    if (auto kid = get_string(*jwk, "kid")) cnf.kid = *kid;
    claims.cnf = std::move(cnf);
  }
  return claims;
}

Checksum compute_step_sequence_hash(const std::vector<std::string>& executed_steps) {
  return compute_checksum(canonical_dump(nlohmann::json(executed_steps)));
}

namespace {

std::string chain_seal_input(const IntentClaims& intent) {
  nlohmann::json doc{{"delegation_chain", intent.delegation_chain},
                     {"step_sequence_hash", intent.step_sequence_hash.to_string()},
                     {"workflow_id", intent.workflow_id}};
  return canonical_dump(doc);
}

}  // namespace

IntentClaims seal_delegation_chain(const IntentClaims& intent,
                                   std::span<const std::uint8_t> chain_key) {
  IntentClaims sealed = intent;
  std::string input = chain_seal_input(intent);
  sealed.chain_tag = to_hex(hmac_sha256(chain_key, as_bytes(input)));
  return sealed;
}

bool verify_delegation_chain(const IntentClaims& intent,
                             std::span<const std::uint8_t> chain_key) {
  if (intent.chain_tag.empty()) return false;
  if (intent.delegation_chain.empty() ||
      intent.delegation_chain.front() != intent.initiated_by ||
      intent.delegation_chain.back() != intent.executed_by)
    return false;
  std::string input = chain_seal_input(intent);
  auto expected = hmac_sha256(chain_key, as_bytes(input));
  auto presented = from_hex(intent.chain_tag);
  if (!presented) return false;
  return constant_time_equal(expected, *presented);
}

}  // namespace ajwt::token
