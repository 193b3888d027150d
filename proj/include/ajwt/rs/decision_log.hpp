#pragma once

// Append-only, hash-chained record of every allow/deny decision the resource
// server makes. Same chaining discipline as the authorization server's
// workflow event log: entry_hash = sha256(prev_entry_hash ‖ canonical body),
// with the head kept separately so truncation is detectable.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ajwt/token/checksum.hpp"

namespace ajwt::rs {

using token::Checksum;

struct DecisionRecord {
  std::uint64_t sequence_no = 0;
  std::int64_t timestamp = 0;
  std::string method;
  std::string path;
  std::string outcome;   // "allowed" or "denied:<reason>"
  std::string jti;       // empty when the token never parsed
  std::string agent_id;  // executed_by, when intent claims were present
  std::string step;      // workflow_step, when intent claims were present
  Checksum prev_entry_hash;
  Checksum entry_hash;

  nlohmann::json to_json() const;
  static DecisionRecord from_json(const nlohmann::json& doc);
};

Checksum decision_entry_hash(const Checksum& prev_entry_hash, const DecisionRecord& record);
Checksum decision_chain_genesis();

struct DecisionChainHead {
  std::uint64_t sequence_no = 0;
  Checksum entry_hash;

  bool operator==(const DecisionChainHead&) const = default;
};

void decision_append(std::vector<DecisionRecord>& records, DecisionChainHead& head,
                     DecisionRecord record);

bool verify_decision_chain(const std::vector<DecisionRecord>& records,
                           const DecisionChainHead& head);

}  // namespace ajwt::rs
