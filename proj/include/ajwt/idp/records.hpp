#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ajwt/token/checksum.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::idp {

using token::Bytes;
using token::Checksum;

struct ClientRecord {
  std::string client_id;
  Checksum client_checksum;
  std::set<std::string> granted_scopes;
  std::string client_secret_hash;  // sha256 hex of the secret

  bool operator==(const ClientRecord&) const = default;
};

struct AgentRecord {
  std::string agent_id;
  std::string client_id;
  Checksum agent_checksum;  // recomputed on the IDP at registration
  Bytes pop_public_key;     // raw Ed25519 public key
  std::string pop_kid;
  std::string registration_id;
  std::string version;
  std::int64_t created_at = 0;

  bool operator==(const AgentRecord&) const = default;
};

struct StepDef {
  std::string step_id;
  std::set<std::string> allowed_agents;
  std::set<std::string> required_scopes;

  bool operator==(const StepDef&) const = default;
};

struct WorkflowDefinition {
  std::string workflow_id;
  std::string client_id;
  std::vector<StepDef> steps;
  std::vector<std::pair<std::string, std::string>> edges;  // (from, to), must form a DAG
  int version = 1;

  const StepDef* find_step(const std::string& step_id) const;

  bool operator==(const WorkflowDefinition&) const = default;
};

struct TokenRequest {
  std::string grant_type;  // "agent_checksum"
  std::string client_id;
  std::string client_secret;        // one of the two credentials
  std::string client_access_token;  // may stand in for the secret
  std::string agent_id;
  Checksum runtime_checksum;
  std::string workflow_id;
  std::string workflow_step;
  std::vector<std::string> executed_steps;
  std::vector<std::string> delegation_chain;
  std::map<std::string, std::string> execution_context;
  Checksum shim_checksum;
  std::optional<std::set<std::string>> requested_scopes;  // absent = step default
  std::string audience;                                   // empty = issuer default
};

struct WorkflowEvent {
  std::uint64_t sequence_no = 0;
  std::int64_t timestamp = 0;
  std::string client_id;
  std::string agent_id;
  std::string workflow_id;
  std::string step;
  std::string outcome;  // "issued" | "denied:<reason>"
  Checksum prev_entry_hash;
  Checksum entry_hash;

  bool operator==(const WorkflowEvent&) const = default;
};

nlohmann::json client_to_json(const ClientRecord& record);
std::optional<ClientRecord> client_from_json(const nlohmann::json& obj);
nlohmann::json agent_to_json(const AgentRecord& record);
std::optional<AgentRecord> agent_from_json(const nlohmann::json& obj);
nlohmann::json workflow_to_json(const WorkflowDefinition& definition);
std::optional<WorkflowDefinition> workflow_from_json(const nlohmann::json& obj);
nlohmann::json event_to_json(const WorkflowEvent& event);
std::optional<WorkflowEvent> event_from_json(const nlohmann::json& obj);

}  // namespace ajwt::idp
