#pragma once

// Authorization server core: registration, the agent_checksum grant pipeline,
// the client_credentials grant for plain access tokens, and the hash-chained
// event log. One mutex serializes writes; issued denials are enumerated codes,
// each producing exactly one log event.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>

#include "ajwt/idp/store.hpp"
#include "ajwt/idp/workflow.hpp"
#include "ajwt/result.hpp"
#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/jwt.hpp"
#include "ajwt/token/pop.hpp"

namespace ajwt::idp {

using Clock = std::function<std::int64_t()>;

// Denial reasons of the agent_checksum grant, in pipeline order.
inline constexpr const char* kDenyUnknownClient = "unknown_client";
inline constexpr const char* kDenyBadClientCredential = "bad_client_credential";
inline constexpr const char* kDenyUnknownAgent = "unknown_agent";
inline constexpr const char* kDenyChecksumMismatch = "checksum_mismatch";
inline constexpr const char* kDenyUnknownWorkflow = "unknown_workflow";
inline constexpr const char* kDenyStepNotInWorkflow = "step_not_in_workflow";
inline constexpr const char* kDenyAgentNotAllowedForStep = "agent_not_allowed_for_step";
inline constexpr const char* kDenyIllegalStepTransition = "illegal_step_transition";
inline constexpr const char* kDenyChainHeadMismatch = "chain_head_mismatch";
inline constexpr const char* kDenyShimChecksumUnknown = "shim_checksum_unknown";
inline constexpr const char* kDenyScopeEscalation = "scope_escalation";

struct IdpConfig {
  std::string issuer = "https://idp.example.com";
  std::string default_audience = "api.github.com";
  std::int64_t token_lifetime_secs = 120;
  // Pre-provisioned authorization grants: grant value → scopes the client may hold.
  std::map<std::string, std::set<std::string>> authorization_grants;
  Bytes chain_mac_key;  // HMAC key for delegation-chain sealing
};

struct ClientRegistration {
  std::string client_id;
  std::string client_secret;  // only set when the record was just created
  bool created = false;
};

struct TokenOutcome {
  bool issued = false;
  std::string deny_reason;  // one of the kDeny* codes when !issued
  std::string access_token;
  std::int64_t expires_in = 0;
  std::string scope;
  token::TokenClaims claims;  // as minted (verification convenience for callers)
};

class IdpService {
 public:
  IdpService(IdpConfig config, token::IssuerKey issuer_key,
             std::unique_ptr<StoreBackend> backend, Clock clock, std::uint64_t rng_seed);

  Result<ClientRegistration> register_client(const std::string& authorization_grant,
                                             const std::string& client_checksum_text);

  Result<AgentRecord> register_agent(const std::string& client_id,
                                     const std::string& client_credential,
                                     const std::string& agent_id,
                                     const token::AgentSignature& signature,
                                     const Bytes& pop_public_key, const std::string& pop_kid,
                                     const std::string& version);

  Result<int> register_workflow(const std::string& client_id,
                                const std::string& client_credential,
                                WorkflowDefinition definition);  // returns stored version

  void add_shim_version(const std::string& version, const Checksum& checksum);

  TokenOutcome issue_intent_token(const TokenRequest& request);
  // grant_type=client_credentials: plain access token, no intent/proof/cnf.
  TokenOutcome issue_access_token(const std::string& client_id,
                                  const std::string& client_credential,
                                  const std::optional<std::set<std::string>>& requested_scopes,
                                  const std::string& audience);

  std::map<std::string, Checksum> well_known_shim_versions() const;
  nlohmann::json jwks() const;
  bool verify_log_integrity() const;

  // Registered agents of one client, credential-gated (shim startup view).
  Result<std::vector<AgentRecord>> list_agents(const std::string& client_id,
                                               const std::string& client_credential) const;

  std::vector<WorkflowEvent> events() const;
  EventChainHead event_head() const;
  std::optional<WorkflowDefinition> latest_workflow(const std::string& client_id,
                                                    const std::string& workflow_id) const;

  const std::string& issuer() const { return config_.issuer; }
  const std::string& default_audience() const { return config_.default_audience; }
  const token::IssuerKey& issuer_key() const { return issuer_key_; }

  // Test hook: corrupts persisted/in-memory history to exercise log auditing.
  void tamper_event_for_test(std::size_t index, const std::string& new_outcome);
  void truncate_events_for_test(std::size_t keep);

 private:
  bool credential_ok(const ClientRecord& client, const std::string& credential) const;
  const AgentRecord* latest_agent_locked(const std::string& client_id,
                                         const std::string& agent_id) const;
  void log_event_locked(const TokenRequest& request, const std::string& outcome);
  std::string fresh_hex_locked(std::size_t bytes);

  IdpConfig config_;
  token::IssuerKey issuer_key_;
  std::unique_ptr<StoreBackend> backend_;
  Clock clock_;
  mutable std::mutex mutex_;
  std::mt19937_64 rng_;
  std::uint64_t registration_counter_ = 0;
  StoreState state_;
};

}  // namespace ajwt::idp
