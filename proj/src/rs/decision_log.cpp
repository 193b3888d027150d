#include "ajwt/rs/decision_log.hpp"

#include "ajwt/token/canonical.hpp"

namespace ajwt::rs {

nlohmann::json DecisionRecord::to_json() const {
  return {{"sequence_no", sequence_no},
          {"timestamp", timestamp},
          {"method", method},
          {"path", path},
          {"outcome", outcome},
          {"jti", jti},
          {"agent_id", agent_id},
          {"step", step},
          {"prev_entry_hash", prev_entry_hash.to_string()},
          {"entry_hash", entry_hash.to_string()}};
}

DecisionRecord DecisionRecord::from_json(const nlohmann::json& doc) {
  DecisionRecord record;
  record.sequence_no = doc.at("sequence_no").get<std::uint64_t>();
  record.timestamp = doc.at("timestamp").get<std::int64_t>();
  record.method = doc.at("method").get<std::string>();
  record.path = doc.at("path").get<std::string>();
  record.outcome = doc.at("outcome").get<std::string>();
  record.jti = doc.at("jti").get<std::string>();
  record.agent_id = doc.at("agent_id").get<std::string>();
  record.step = doc.at("step").get<std::string>();
  record.prev_entry_hash = Checksum::parse(doc.at("prev_entry_hash").get<std::string>()).value();
  record.entry_hash = Checksum::parse(doc.at("entry_hash").get<std::string>()).value();
  return record;
}

Checksum decision_entry_hash(const Checksum& prev_entry_hash, const DecisionRecord& record) {
  nlohmann::json body{{"agent_id", record.agent_id},
                      {"jti", record.jti},
                      {"method", record.method},
                      {"outcome", record.outcome},
                      {"path", record.path},
                      {"sequence_no", record.sequence_no},
                      {"step", record.step},
                      {"timestamp", record.timestamp}};
  return token::compute_checksum(prev_entry_hash.to_string() + token::canonical_dump(body));
}

Checksum decision_chain_genesis() { return token::compute_checksum(""); }

void decision_append(std::vector<DecisionRecord>& records, DecisionChainHead& head,
                     DecisionRecord record) {
  record.sequence_no = head.sequence_no + 1;
  record.prev_entry_hash = head.sequence_no == 0 ? decision_chain_genesis() : head.entry_hash;
  record.entry_hash = decision_entry_hash(record.prev_entry_hash, record);
  head = DecisionChainHead{record.sequence_no, record.entry_hash};
  records.push_back(std::move(record));
}

bool verify_decision_chain(const std::vector<DecisionRecord>& records,
                           const DecisionChainHead& head) {
  Checksum running = decision_chain_genesis();
  std::uint64_t expected_seq = 1;
  for (const DecisionRecord& record : records) {
    if (record.sequence_no != expected_seq) return false;
    if (record.prev_entry_hash != running) return false;
    if (record.entry_hash != decision_entry_hash(running, record)) return false;
    running = record.entry_hash;
    ++expected_seq;
  }
  if (records.empty()) return head.sequence_no == 0;
  return head.sequence_no == records.back().sequence_no && head.entry_hash == running;
}

}  // namespace ajwt::rs
