#include "ajwt/idp/service.hpp"

#include <algorithm>

namespace ajwt::idp {

namespace {

std::string join_scopes(const std::set<std::string>& scopes) {
  std::string out;
  for (const std::string& scope : scopes) {
    if (!out.empty()) out += ' ';
    out += scope;
  }
  return out;
}

std::string secret_hash(const std::string& secret) {
  return token::to_hex(token::sha256(token::as_bytes(secret)));
}

}  // namespace

IdpService::IdpService(IdpConfig config, token::IssuerKey issuer_key,
                       std::unique_ptr<StoreBackend> backend, Clock clock,
                       std::uint64_t rng_seed)
    : config_(std::move(config)),
      issuer_key_(std::move(issuer_key)),
      backend_(std::move(backend)),
      clock_(std::move(clock)),
      rng_(rng_seed) {
  if (auto persisted = backend_->load()) state_ = std::move(*persisted);
}

std::string IdpService::fresh_hex_locked(std::size_t bytes) {
  std::string out;
  out.reserve(bytes * 2);
  static const char* digits = "0123456789abcdef";
  for (std::size_t i = 0; i < bytes; ++i) {
    auto b = static_cast<std::uint8_t>(rng_());
    out += digits[b >> 4];
    out += digits[b & 0x0f];
  }
  return out;
}

Result<ClientRegistration> IdpService::register_client(
    const std::string& authorization_grant, const std::string& client_checksum_text) {
  using R = Result<ClientRegistration>;
  auto grant = config_.authorization_grants.find(authorization_grant);
  if (grant == config_.authorization_grants.end())
    return R::failure("invalid_grant", "authorization grant not recognized");
  auto checksum = Checksum::parse(client_checksum_text);
  if (!checksum) return R::failure("malformed_checksum", "expected sha256:<64 hex>");

  std::scoped_lock lock(mutex_);
  std::string key = authorization_grant + "|" + checksum->to_string();
  if (auto existing = state_.registration_index.find(key);
      existing != state_.registration_index.end())
    return R::success(ClientRegistration{existing->second, "", false});

  ClientRegistration registration;
  registration.client_id = "client_" + fresh_hex_locked(6);
  registration.client_secret = fresh_hex_locked(16);
  registration.created = true;

  ClientRecord record;
  record.client_id = registration.client_id;
  record.client_checksum = *checksum;
  record.granted_scopes = grant->second;
  record.client_secret_hash = secret_hash(registration.client_secret);
  state_.clients.emplace(record.client_id, std::move(record));
  state_.registration_index.emplace(key, registration.client_id);
  backend_->persist(state_);
  return R::success(std::move(registration));
}

bool IdpService::credential_ok(const ClientRecord& client, const std::string& credential) const {
  if (credential.empty()) return false;
  if (secret_hash(credential) == client.client_secret_hash) return true;
  // Alternatively a client-level access token minted by this issuer for this
  // client (sub == client_id) still inside its validity window.
  token::TrustedKeys own{{issuer_key_.kid, issuer_key_.key}};
  auto decoded = token::decode_token_unverified(credential);
  if (!decoded) return false;
  auto aud = decoded->payload.find("aud");
  if (aud == decoded->payload.end() || !aud->is_string()) return false;
  auto verified = token::verify_token(credential, own, config_.issuer,
                                      aud->get<std::string>(), clock_());
  return verified.ok() && verified.claims.sub == client.client_id &&
         !verified.claims.intent.has_value();
}

const AgentRecord* IdpService::latest_agent_locked(const std::string& client_id,
                                                   const std::string& agent_id) const {
  const AgentRecord* found = nullptr;
  for (const AgentRecord& record : state_.agents)
    if (record.client_id == client_id && record.agent_id == agent_id) found = &record;
  return found;
}

Result<AgentRecord> IdpService::register_agent(
    const std::string& client_id, const std::string& client_credential,
    const std::string& agent_id, const token::AgentSignature& signature,
    const Bytes& pop_public_key, const std::string& pop_kid, const std::string& version) {
  using R = Result<AgentRecord>;
  if (agent_id.empty()) return R::failure("invalid_agent", "agent_id required");
  if (pop_public_key.size() != 32)
    return R::failure("malformed_pop_key", "expected raw 32-byte Ed25519 key");

  Checksum checksum;
  try {
    // Always recomputed here from the submitted components; a client-supplied
    // hash is never trusted.
    checksum = token::agent_signature_checksum(signature);
  } catch (const std::invalid_argument& e) {
    return R::failure("invalid_agent_signature", e.what());
  }

  std::scoped_lock lock(mutex_);
  auto client = state_.clients.find(client_id);
  if (client == state_.clients.end()) return R::failure(kDenyUnknownClient);
  if (!credential_ok(client->second, client_credential))
    return R::failure(kDenyBadClientCredential);
  for (const AgentRecord& record : state_.agents)
    if (record.client_id == client_id && record.agent_checksum == checksum)
      return R::failure("duplicate_agent_checksum",
                        "identical signature already registered as " + record.agent_id);

  AgentRecord record;
  record.agent_id = agent_id;
  record.client_id = client_id;
  record.agent_checksum = checksum;
  record.pop_public_key = pop_public_key;
  record.pop_kid = pop_kid;
  record.created_at = clock_();
  record.registration_id =
      "reg_" + std::to_string(record.created_at) + "_" + std::to_string(++registration_counter_);
  record.version = version.empty() ? "1.0.0" : version;
  state_.agents.push_back(record);
  backend_->persist(state_);
  return R::success(std::move(record));
}

Result<int> IdpService::register_workflow(const std::string& client_id,
                                          const std::string& client_credential,
                                          WorkflowDefinition definition) {
  using R = Result<int>;
  std::scoped_lock lock(mutex_);
  auto client = state_.clients.find(client_id);
  if (client == state_.clients.end()) return R::failure(kDenyUnknownClient);
  if (!credential_ok(client->second, client_credential))
    return R::failure(kDenyBadClientCredential);

  std::set<std::string> known_agents;
  for (const AgentRecord& record : state_.agents)
    if (record.client_id == client_id) known_agents.insert(record.agent_id);
  auto validated = validate_workflow(definition, known_agents);
  if (!validated.ok()) return R::failure(validated.error, validated.detail);

  definition.client_id = client_id;
  auto& versions = state_.workflows[StoreState::workflow_key(client_id, definition.workflow_id)];
  definition.version = versions.empty() ? 1 : versions.back().version + 1;
  int stored_version = definition.version;
  versions.push_back(std::move(definition));
  backend_->persist(state_);
  return R::success(std::move(stored_version));
}

void IdpService::add_shim_version(const std::string& version, const Checksum& checksum) {
  std::scoped_lock lock(mutex_);
  state_.shim_versions[version] = checksum;
  backend_->persist(state_);
}

void IdpService::log_event_locked(const TokenRequest& request, const std::string& outcome) {
  WorkflowEvent event;
  event.timestamp = clock_();
  event.client_id = request.client_id;
  event.agent_id = request.agent_id;
  event.workflow_id = request.workflow_id;
  event.step = request.workflow_step;
  event.outcome = outcome;
  chain_append(state_.events, state_.event_head, std::move(event));
  backend_->persist(state_);
}

TokenOutcome IdpService::issue_intent_token(const TokenRequest& request) {
  std::scoped_lock lock(mutex_);
  TokenOutcome outcome;

  auto deny = [&](const char* reason) {
    outcome.issued = false;
    outcome.deny_reason = reason;
    log_event_locked(request, std::string("denied:") + reason);
    return outcome;
  };

  if (request.grant_type != "agent_checksum")
    throw std::invalid_argument("issue_intent_token requires grant_type=agent_checksum");

  auto client_it = state_.clients.find(request.client_id);
  if (client_it == state_.clients.end()) return deny(kDenyUnknownClient);
  const ClientRecord& client = client_it->second;

  const std::string& credential =
      !request.client_secret.empty() ? request.client_secret : request.client_access_token;
  if (!credential_ok(client, credential)) return deny(kDenyBadClientCredential);

  const AgentRecord* agent = latest_agent_locked(request.client_id, request.agent_id);
  if (agent == nullptr) return deny(kDenyUnknownAgent);

  // The live checksum computed inside the running process must equal the
  // registered one; drifted or impersonated agent code fails here.
  if (request.runtime_checksum != agent->agent_checksum) return deny(kDenyChecksumMismatch);

  auto workflow_it =
      state_.workflows.find(StoreState::workflow_key(request.client_id, request.workflow_id));
  if (workflow_it == state_.workflows.end() || workflow_it->second.empty())
    return deny(kDenyUnknownWorkflow);
  const WorkflowDefinition& workflow = workflow_it->second.back();

  const StepDef* step = workflow.find_step(request.workflow_step);
  if (step == nullptr) return deny(kDenyStepNotInWorkflow);

  if (!step->allowed_agents.contains(request.agent_id))
    return deny(kDenyAgentNotAllowedForStep);

  if (!is_legal_step_sequence(workflow, request.executed_steps, request.workflow_step))
    return deny(kDenyIllegalStepTransition);

  if (request.delegation_chain.empty() || request.delegation_chain.back() != request.agent_id ||
      !is_chain_consistent(workflow, request.delegation_chain))
    return deny(kDenyChainHeadMismatch);

  bool shim_known = false;
  for (const auto& [version, checksum] : state_.shim_versions)
    shim_known = shim_known || checksum == request.shim_checksum;
  if (!shim_known) return deny(kDenyShimChecksumUnknown);

  std::set<std::string> issued_scopes;
  std::ranges::set_intersection(client.granted_scopes, step->required_scopes,
                                std::inserter(issued_scopes, issued_scopes.begin()));
  // The step as requested must stay inside the client's grant, and an explicit
  // scope request must stay inside the step's needs.
  if (!std::ranges::includes(client.granted_scopes, step->required_scopes))
    return deny(kDenyScopeEscalation);
  if (request.requested_scopes &&
      !std::ranges::includes(issued_scopes, *request.requested_scopes))
    return deny(kDenyScopeEscalation);
  if (request.requested_scopes) issued_scopes = *request.requested_scopes;

  std::int64_t now = clock_();
  token::TokenClaims claims;
  claims.iss = config_.issuer;
  claims.sub = request.agent_id;
  claims.aud = request.audience.empty() ? config_.default_audience : request.audience;
  claims.iat = now;
  claims.exp = now + config_.token_lifetime_secs;
  claims.jti = "token_" + fresh_hex_locked(8);
  claims.scope = join_scopes(issued_scopes);

  token::IntentClaims intent;
  intent.workflow_id = request.workflow_id;
  intent.workflow_step = request.workflow_step;
  intent.executed_by = request.agent_id;
  intent.initiated_by = request.delegation_chain.front();
  intent.delegation_chain = request.delegation_chain;
  intent.step_sequence_hash = token::compute_step_sequence_hash(request.executed_steps);
  intent.execution_context = request.execution_context;
  claims.intent = seal_delegation_chain(intent, config_.chain_mac_key);

  claims.agent_proof =
      token::AgentProof{agent->agent_checksum, agent->registration_id, agent->version};
  claims.cnf = token::PopBinding{token::jwk_thumbprint(agent->pop_public_key),
                                 agent->pop_public_key, agent->pop_kid};

  outcome.issued = true;
  outcome.access_token = token::mint_token(claims, issuer_key_);
  outcome.expires_in = config_.token_lifetime_secs;
  outcome.scope = claims.scope;
  outcome.claims = std::move(claims);
  log_event_locked(request, "issued");
  return outcome;
}

TokenOutcome IdpService::issue_access_token(
    const std::string& client_id, const std::string& client_credential,
    const std::optional<std::set<std::string>>& requested_scopes, const std::string& audience) {
  std::scoped_lock lock(mutex_);
  TokenOutcome outcome;
  auto client_it = state_.clients.find(client_id);
  if (client_it == state_.clients.end()) {
    outcome.deny_reason = kDenyUnknownClient;
    return outcome;
  }
  if (!credential_ok(client_it->second, client_credential)) {
    outcome.deny_reason = kDenyBadClientCredential;
    return outcome;
  }
  std::set<std::string> scopes = client_it->second.granted_scopes;
  if (requested_scopes) {
    if (!std::ranges::includes(scopes, *requested_scopes)) {
      outcome.deny_reason = kDenyScopeEscalation;
      return outcome;
    }
    scopes = *requested_scopes;
  }

  std::int64_t now = clock_();
  token::TokenClaims claims;
  claims.iss = config_.issuer;
  claims.sub = client_id;
  claims.aud = audience.empty() ? config_.default_audience : audience;
  claims.iat = now;
  claims.exp = now + config_.token_lifetime_secs;
  claims.jti = "token_" + fresh_hex_locked(8);
  claims.scope = join_scopes(scopes);

  outcome.issued = true;
  outcome.access_token = token::mint_token(claims, issuer_key_);
  outcome.expires_in = config_.token_lifetime_secs;
  outcome.scope = claims.scope;
  outcome.claims = std::move(claims);
  return outcome;
}

std::map<std::string, Checksum> IdpService::well_known_shim_versions() const {
  std::scoped_lock lock(mutex_);
  return state_.shim_versions;
}

nlohmann::json IdpService::jwks() const { return token::jwks_from_issuer(issuer_key_); }

bool IdpService::verify_log_integrity() const {
  std::scoped_lock lock(mutex_);
  return verify_event_chain(state_.events, state_.event_head);
}

Result<std::vector<AgentRecord>> IdpService::list_agents(
    const std::string& client_id, const std::string& client_credential) const {
  using R = Result<std::vector<AgentRecord>>;
  std::scoped_lock lock(mutex_);
  auto client = state_.clients.find(client_id);
  if (client == state_.clients.end()) return R::failure(kDenyUnknownClient);
  if (!credential_ok(client->second, client_credential))
    return R::failure(kDenyBadClientCredential);
  std::vector<AgentRecord> out;
  for (const AgentRecord& record : state_.agents)
    if (record.client_id == client_id) out.push_back(record);
  return R::success(std::move(out));
}

std::vector<WorkflowEvent> IdpService::events() const {
  std::scoped_lock lock(mutex_);
  return state_.events;
}

EventChainHead IdpService::event_head() const {
  std::scoped_lock lock(mutex_);
  return state_.event_head;
}

std::optional<WorkflowDefinition> IdpService::latest_workflow(
    const std::string& client_id, const std::string& workflow_id) const {
  std::scoped_lock lock(mutex_);
  auto it = state_.workflows.find(StoreState::workflow_key(client_id, workflow_id));
  if (it == state_.workflows.end() || it->second.empty()) return std::nullopt;
  return it->second.back();
}

void IdpService::tamper_event_for_test(std::size_t index, const std::string& new_outcome) {
  std::scoped_lock lock(mutex_);
  if (index < state_.events.size()) state_.events[index].outcome = new_outcome;
}

void IdpService::truncate_events_for_test(std::size_t keep) {
  std::scoped_lock lock(mutex_);
  if (keep < state_.events.size()) state_.events.resize(keep);
}

}  // namespace ajwt::idp
