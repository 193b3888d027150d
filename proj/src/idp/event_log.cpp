#include "ajwt/idp/event_log.hpp"

#include "ajwt/token/canonical.hpp"

namespace ajwt::idp {

Checksum event_entry_hash(const Checksum& prev_entry_hash, const WorkflowEvent& event) {
  nlohmann::json body{{"agent_id", event.agent_id},
                      {"client_id", event.client_id},
                      {"outcome", event.outcome},
                      {"sequence_no", event.sequence_no},
                      {"step", event.step},
                      {"timestamp", event.timestamp},
                      {"workflow_id", event.workflow_id}};
  return token::compute_checksum(prev_entry_hash.to_string() + token::canonical_dump(body));
}

Checksum event_chain_genesis() { return token::compute_checksum(""); }

void chain_append(std::vector<WorkflowEvent>& events, EventChainHead& head,
                  WorkflowEvent event) {
  event.sequence_no = head.sequence_no + 1;
  event.prev_entry_hash = head.sequence_no == 0 ? event_chain_genesis() : head.entry_hash;
  event.entry_hash = event_entry_hash(event.prev_entry_hash, event);
  head = EventChainHead{event.sequence_no, event.entry_hash};
  events.push_back(std::move(event));
}

bool verify_event_chain(const std::vector<WorkflowEvent>& events, const EventChainHead& head) {
  Checksum running = event_chain_genesis();
  std::uint64_t expected_seq = 1;
  for (const WorkflowEvent& event : events) {
    if (event.sequence_no != expected_seq) return false;
    if (event.prev_entry_hash != running) return false;
    if (event.entry_hash != event_entry_hash(running, event)) return false;
    running = event.entry_hash;
    ++expected_seq;
  }
  if (events.empty()) return head.sequence_no == 0;
  return head.sequence_no == events.back().sequence_no && head.entry_hash == running;
}

}  // namespace ajwt::idp
