#include "ajwt/idp/records.hpp"

namespace ajwt::idp {

namespace {

std::optional<std::string> get_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::optional<Checksum> get_checksum(const nlohmann::json& obj, const char* key) {
  auto text = get_string(obj, key);
  if (!text) return std::nullopt;
  return Checksum::parse(*text);
}

std::optional<std::set<std::string>> get_string_set(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) return std::nullopt;
  std::set<std::string> out;
  for (const auto& item : *it) {
    if (!item.is_string()) return std::nullopt;
    out.insert(item.get<std::string>());
  }
  return out;
}

}  // namespace

nlohmann::json client_to_json(const ClientRecord& record) {
  return {{"client_id", record.client_id},
          {"client_checksum", record.client_checksum.to_string()},
          {"granted_scopes", record.granted_scopes},
          {"client_secret_hash", record.client_secret_hash}};
}

std::optional<ClientRecord> client_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  auto client_id = get_string(obj, "client_id");
  auto checksum = get_checksum(obj, "client_checksum");
  auto scopes = get_string_set(obj, "granted_scopes");
  auto secret_hash = get_string(obj, "client_secret_hash");
  if (!client_id || !checksum || !scopes || !secret_hash) return std::nullopt;
  return ClientRecord{*client_id, *checksum, *scopes, *secret_hash};
}

nlohmann::json agent_to_json(const AgentRecord& record) {
  return {{"agent_id", record.agent_id},
          {"client_id", record.client_id},
          {"agent_checksum", record.agent_checksum.to_string()},
          {"pop_public_key", token::base64url_encode(record.pop_public_key)},
          {"pop_kid", record.pop_kid},
          {"registration_id", record.registration_id},
          {"version", record.version},
          {"created_at", record.created_at}};
}

std::optional<AgentRecord> agent_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  auto agent_id = get_string(obj, "agent_id");
  auto client_id = get_string(obj, "client_id");
  auto checksum = get_checksum(obj, "agent_checksum");
  auto pop_key = get_string(obj, "pop_public_key");
  auto pop_kid = get_string(obj, "pop_kid");
  auto registration_id = get_string(obj, "registration_id");
  auto version = get_string(obj, "version");
  auto created_at = obj.find("created_at");
  if (!agent_id || !client_id || !checksum || !pop_key || !pop_kid || !registration_id ||
      !version || created_at == obj.end() || !created_at->is_number_integer())
    return std::nullopt;
  auto raw = token::base64url_decode(*pop_key);
  if (!raw || raw->size() != 32) return std::nullopt;
  return AgentRecord{*agent_id,         *client_id, *checksum,
                     *raw,              *pop_kid,   *registration_id,
                     *version,          created_at->get<std::int64_t>()};
}

nlohmann::json workflow_to_json(const WorkflowDefinition& definition) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepDef& step : definition.steps)
    steps.push_back({{"step_id", step.step_id},
                     {"allowed_agents", step.allowed_agents},
                     {"required_scopes", step.required_scopes}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [from, to] : definition.edges)
    edges.push_back(nlohmann::json::array({from, to}));
  return {{"workflow_id", definition.workflow_id},
          {"client_id", definition.client_id},
          {"steps", std::move(steps)},
          {"edges", std::move(edges)},
          {"version", definition.version}};
}

std::optional<WorkflowDefinition> workflow_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  WorkflowDefinition definition;
  auto workflow_id = get_string(obj, "workflow_id");
  if (!workflow_id) return std::nullopt;
  definition.workflow_id = *workflow_id;
  if (auto client_id = get_string(obj, "client_id")) definition.client_id = *client_id;
  if (auto version = obj.find("version");
      version != obj.end() && version->is_number_integer())
    definition.version = version->get<int>();

  auto steps = obj.find("steps");
  if (steps == obj.end() || !steps->is_array()) return std::nullopt;
  for (const auto& step : *steps) {
    auto step_id = get_string(step, "step_id");
    auto allowed = get_string_set(step, "allowed_agents");
    auto scopes = get_string_set(step, "required_scopes");
    if (!step_id || !allowed) return std::nullopt;
    definition.steps.push_back(
        {*step_id, *allowed, scopes.value_or(std::set<std::string>{})});
  }
  if (auto edges = obj.find("edges"); edges != obj.end()) {
    if (!edges->is_array()) return std::nullopt;
    for (const auto& edge : *edges) {
      if (!edge.is_array() || edge.size() != 2 || !edge[0].is_string() || !edge[1].is_string())
        return std::nullopt;
      definition.edges.emplace_back(edge[0].get<std::string>(), edge[1].get<std::string>());
    }
  }
  return definition;
}

nlohmann::json event_to_json(const WorkflowEvent& event) {
  return {{"sequence_no", event.sequence_no},
          {"timestamp", event.timestamp},
          {"client_id", event.client_id},
          {"agent_id", event.agent_id},
          {"workflow_id", event.workflow_id},
          {"step", event.step},
          {"outcome", event.outcome},
          {"prev_entry_hash", event.prev_entry_hash.to_string()},
          {"entry_hash", event.entry_hash.to_string()}};
}

std::optional<WorkflowEvent> event_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) return std::nullopt;
  WorkflowEvent event;
  auto seq = obj.find("sequence_no");
  auto ts = obj.find("timestamp");
  if (seq == obj.end() || !seq->is_number_unsigned() || ts == obj.end() ||
      !ts->is_number_integer())
    return std::nullopt;
  event.sequence_no = seq->get<std::uint64_t>();
  event.timestamp = ts->get<std::int64_t>();
  auto client_id = get_string(obj, "client_id");
  auto agent_id = get_string(obj, "agent_id");
  auto workflow_id = get_string(obj, "workflow_id");
  auto step = get_string(obj, "step");
  auto outcome = get_string(obj, "outcome");
  auto prev = get_checksum(obj, "prev_entry_hash");
  auto hash = get_checksum(obj, "entry_hash");
  if (!client_id || !agent_id || !workflow_id || !step || !outcome || !prev || !hash)
    return std::nullopt;
  event.client_id = *client_id;
  event.agent_id = *agent_id;
  event.workflow_id = *workflow_id;
  event.step = *step;
  event.outcome = *outcome;
  event.prev_entry_hash = *prev;
  event.entry_hash = *hash;
  return event;
}

}  // namespace ajwt::idp
