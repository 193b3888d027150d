#pragma once

// Bridge identifiers: binding each registered agent to a live program anchor,
// so runtime checksum resolution keys on object identity rather than on a
// name any co-resident impersonator could reuse. Anchors are registered once
// during startup; the registry then seals and stays read-only.

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "ajwt/result.hpp"
#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/checksum.hpp"

namespace ajwt::shim {

using token::Checksum;

// A stable in-process identity the host application owns for the lifetime of
// an agent — the "program anchor". Deliberately non-copyable and non-movable:
// its address plus a process-unique stamp IS the identity.
class Anchor {
 public:
  Anchor();
  Anchor(const Anchor&) = delete;
  Anchor& operator=(const Anchor&) = delete;

  std::uint64_t stamp() const { return stamp_; }

 private:
  std::uint64_t stamp_;
};

struct BridgeIdentifier {
  std::uint64_t anchor_id = 0;  // the anchor's stamp at registration
  std::string agent_id;
  Checksum checksum_at_startup;
};

class BridgeRegistry {
 public:
  // Startup-time binding; computes the checksum from the signature as given.
  // Fails on a re-registered anchor, a duplicate agent id, or a sealed
  // registry.
  Result<BridgeIdentifier> register_anchor(const Anchor& anchor, const std::string& agent_id,
                                           const token::AgentSignature& signature);

  // Ends startup; later registrations are refused.
  void seal();
  bool sealed() const;

  // Call-time resolution. The caller must present the live anchor object
  // itself; there is intentionally no way to look up by agent name. Fails
  // with "unknown_anchor" for an unregistered (or stale) anchor and with
  // "agent_anchor_mismatch" when the anchor belongs to a different agent.
  Result<Checksum> resolve_runtime_checksum(const Anchor& anchor,
                                            const std::string& claimed_agent_id) const;

 private:
  struct Entry {
    std::uint64_t stamp = 0;
    std::string agent_id;
    Checksum checksum;
  };

  mutable std::mutex mutex_;
  std::map<const Anchor*, Entry> entries_;
  bool sealed_ = false;
};

}  // namespace ajwt::shim
