#pragma once

// IDP persistence: a single state snapshot plus a pluggable backend. The
// in-memory backend keeps nothing (tests, harness); the file backend writes
// one JSON document with atomic temp-file + rename semantics.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ajwt/idp/event_log.hpp"
#include "ajwt/idp/records.hpp"

namespace ajwt::idp {

struct StoreState {
  std::map<std::string, ClientRecord> clients;               // by client_id
  std::map<std::string, std::string> registration_index;     // (grant ‖ checksum) → client_id
  std::vector<AgentRecord> agents;                           // append-only version rows
  std::map<std::string, std::vector<WorkflowDefinition>> workflows;  // key: client/workflow
  std::map<std::string, Checksum> shim_versions;             // version → release checksum
  std::vector<WorkflowEvent> events;
  EventChainHead event_head;

  static std::string workflow_key(const std::string& client_id, const std::string& workflow_id) {
    return client_id + "/" + workflow_id;
  }
};

nlohmann::json store_state_to_json(const StoreState& state);
std::optional<StoreState> store_state_from_json(const nlohmann::json& doc);

class StoreBackend {
 public:
  virtual ~StoreBackend() = default;
  virtual std::optional<StoreState> load() = 0;
  virtual void persist(const StoreState& state) = 0;
};

class InMemoryBackend final : public StoreBackend {
 public:
  std::optional<StoreState> load() override { return std::nullopt; }
  void persist(const StoreState&) override {}
};

class FileBackend final : public StoreBackend {
 public:
  explicit FileBackend(std::string path) : path_(std::move(path)) {}
  std::optional<StoreState> load() override;
  void persist(const StoreState& state) override;

 private:
  std::string path_;
};

}  // namespace ajwt::idp
