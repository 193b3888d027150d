#include "ajwt/shim/bridge.hpp"

#include <atomic>

namespace ajwt::shim {

namespace {
std::uint64_t next_stamp() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}
}  // namespace

Anchor::Anchor() : stamp_(next_stamp()) {}

Result<BridgeIdentifier> BridgeRegistry::register_anchor(const Anchor& anchor,
                                                         const std::string& agent_id,
                                                         const token::AgentSignature& signature) {
  std::scoped_lock lock(mutex_);
  if (sealed_)
    return Result<BridgeIdentifier>::failure("registry_sealed",
                                             "anchors register during startup only");
  if (entries_.contains(&anchor))
    return Result<BridgeIdentifier>::failure("anchor_already_registered",
                                             "an anchor binds exactly one agent");
  for (const auto& [unused, entry] : entries_)
    if (entry.agent_id == agent_id)
      return Result<BridgeIdentifier>::failure("agent_already_anchored",
                                               "agent '" + agent_id + "' already has an anchor");
  Checksum checksum = token::agent_signature_checksum(signature);
  entries_[&anchor] = Entry{anchor.stamp(), agent_id, checksum};
  return Result<BridgeIdentifier>::success({anchor.stamp(), agent_id, checksum});
}

void BridgeRegistry::seal() {
  std::scoped_lock lock(mutex_);
  sealed_ = true;
}

bool BridgeRegistry::sealed() const {
  std::scoped_lock lock(mutex_);
  return sealed_;
}

Result<Checksum> BridgeRegistry::resolve_runtime_checksum(
    const Anchor& anchor, const std::string& claimed_agent_id) const {
  std::scoped_lock lock(mutex_);
  auto it = entries_.find(&anchor);
  // The stamp guards against a different object recreated at a reused
  // address: identity means the same live object, not the same location.
  if (it == entries_.end() || it->second.stamp != anchor.stamp())
    return Result<Checksum>::failure("unknown_anchor", "anchor was never registered");
  if (it->second.agent_id != claimed_agent_id)
    return Result<Checksum>::failure(
        "agent_anchor_mismatch",
        "anchor belongs to '" + it->second.agent_id + "', not '" + claimed_agent_id + "'");
  return Result<Checksum>::success(Checksum(it->second.checksum));
}

}  // namespace ajwt::shim
