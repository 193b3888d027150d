#pragma once

// Append-only, hash-chained workflow event log. Each entry commits to its
// predecessor: entry_hash = sha256(prev_entry_hash ‖ canonical event body).
// The chain head (sequence_no, entry_hash) is stored separately so tail
// truncation is detectable, not just in-place mutation.

#include <cstdint>
#include <vector>

#include "ajwt/idp/records.hpp"

namespace ajwt::idp {

// Hash over the event body (everything except the two hash fields).
Checksum event_entry_hash(const Checksum& prev_entry_hash, const WorkflowEvent& event);

// The prev hash of the very first entry.
Checksum event_chain_genesis();

struct EventChainHead {
  std::uint64_t sequence_no = 0;  // 0 = empty log
  Checksum entry_hash;            // genesis value when empty

  bool operator==(const EventChainHead&) const = default;
};

// Appends in place: fills sequence_no, prev_entry_hash, entry_hash.
void chain_append(std::vector<WorkflowEvent>& events, EventChainHead& head, WorkflowEvent event);

// Full-chain verification against the stored head; false on any rewritten,
// reordered, inserted, or truncated entry.
bool verify_event_chain(const std::vector<WorkflowEvent>& events, const EventChainHead& head);

}  // namespace ajwt::idp
