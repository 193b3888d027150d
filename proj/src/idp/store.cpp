#include "ajwt/idp/store.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ajwt::idp {

nlohmann::json store_state_to_json(const StoreState& state) {
  nlohmann::json clients = nlohmann::json::object();
  for (const auto& [id, record] : state.clients) clients[id] = client_to_json(record);

  nlohmann::json agents = nlohmann::json::array();
  for (const AgentRecord& record : state.agents) agents.push_back(agent_to_json(record));

  nlohmann::json workflows = nlohmann::json::object();
  for (const auto& [key, versions] : state.workflows) {
    nlohmann::json list = nlohmann::json::array();
    for (const WorkflowDefinition& definition : versions)
      list.push_back(workflow_to_json(definition));
    workflows[key] = std::move(list);
  }

  nlohmann::json shim_versions = nlohmann::json::object();
  for (const auto& [version, checksum] : state.shim_versions)
    shim_versions[version] = checksum.to_string();

  nlohmann::json events = nlohmann::json::array();
  for (const WorkflowEvent& event : state.events) events.push_back(event_to_json(event));

  return {{"clients", std::move(clients)},
          {"registration_index", state.registration_index},
          {"agents", std::move(agents)},
          {"workflows", std::move(workflows)},
          {"shim_versions", std::move(shim_versions)},
          {"events", std::move(events)},
          {"event_head",
           {{"sequence_no", state.event_head.sequence_no},
            {"entry_hash", state.event_head.entry_hash.to_string()}}}};
}

std::optional<StoreState> store_state_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) return std::nullopt;
  StoreState state;
  if (auto it = doc.find("clients"); it != doc.end() && it->is_object()) {
    for (const auto& [id, value] : it->items()) {
      auto record = client_from_json(value);
      if (!record) return std::nullopt;
      state.clients.emplace(id, std::move(*record));
    }
  }
  if (auto it = doc.find("registration_index"); it != doc.end() && it->is_object()) {
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) return std::nullopt;
      state.registration_index.emplace(key, value.get<std::string>());
    }
  }
  if (auto it = doc.find("agents"); it != doc.end() && it->is_array()) {
    for (const auto& value : *it) {
      auto record = agent_from_json(value);
      if (!record) return std::nullopt;
      state.agents.push_back(std::move(*record));
    }
  }
  if (auto it = doc.find("workflows"); it != doc.end() && it->is_object()) {
    for (const auto& [key, list] : it->items()) {
      if (!list.is_array()) return std::nullopt;
      std::vector<WorkflowDefinition> versions;
      for (const auto& value : list) {
        auto definition = workflow_from_json(value);
        if (!definition) return std::nullopt;
        versions.push_back(std::move(*definition));
      }
      state.workflows.emplace(key, std::move(versions));
    }
  }
  if (auto it = doc.find("shim_versions"); it != doc.end() && it->is_object()) {
    for (const auto& [version, value] : it->items()) {
      if (!value.is_string()) return std::nullopt;
      auto checksum = Checksum::parse(value.get<std::string>());
      if (!checksum) return std::nullopt;
      state.shim_versions.emplace(version, *checksum);
    }
  }
  if (auto it = doc.find("events"); it != doc.end() && it->is_array()) {
    for (const auto& value : *it) {
      auto event = event_from_json(value);
      if (!event) return std::nullopt;
      state.events.push_back(std::move(*event));
    }
  }
  if (auto it = doc.find("event_head"); it != doc.end() && it->is_object()) {
    auto seq = it->find("sequence_no");
    auto hash = it->find("entry_hash");
    if (seq == it->end() || !seq->is_number_unsigned() || hash == it->end() ||
        !hash->is_string())
      return std::nullopt;
    auto parsed = Checksum::parse(hash->get<std::string>());
    if (!parsed) return std::nullopt;
    state.event_head = EventChainHead{seq->get<std::uint64_t>(), *parsed};
  }
  return state;
}

std::optional<StoreState> FileBackend::load() {
  std::ifstream in(path_);
  if (!in) return std::nullopt;
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw std::runtime_error("store file is not valid JSON: " + path_);
  auto state = store_state_from_json(doc);
  if (!state) throw std::runtime_error("store file has an unexpected layout: " + path_);
  return state;
}

void FileBackend::persist(const StoreState& state) {
  std::string tmp = path_ + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write store file: " + tmp);
    out << store_state_to_json(state).dump(2) << '\n';
  }
  if (std::rename(tmp.c_str(), path_.c_str()) != 0)
    throw std::runtime_error("cannot move store file into place: " + path_);
}

}  // namespace ajwt::idp
