#pragma once

// The client-side enforcement layer embedded in an agentic application:
// proves its own build, verifies every local agent against the issuer's
// registry at startup, tracks workflow state, acquires intent tokens (with a
// per-step cache), signs requests with the agent's key, and injects the
// agentic headers on every outbound call.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ajwt/result.hpp"
#include "ajwt/shim/bridge.hpp"
#include "ajwt/shim/http_client.hpp"
#include "ajwt/shim/tracker.hpp"
#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/pop.hpp"

namespace ajwt::shim {

// The distributed artifact for a release of this layer. The reference
// implementation models the artifact as a version-stamped byte string; real
// deployments would hash the installed library bytes.
std::string release_artifact_bytes(const std::string& version);

struct ShimConfig {
  std::string idp_base_url;
  std::string client_id;
  std::string client_secret;
  std::string version = "1.4.2";
  std::string artifact_bytes;  // defaults to release_artifact_bytes(version)
  std::string audience;        // "" = issuer default
  std::int64_t cache_margin_secs = 5;
  // Local fail-closed gates: refuse to serve unless this build is published
  // by the issuer and startup verification passed. Turning this off models a
  // tampered build that skipped its own checks — the issuer and resource
  // servers still reject its traffic by checksum.
  bool enforce_release_check = true;
};

// One local agent as the shim sees it: identity material, signing key, and
// the live anchor binding it to the registered identity.
struct AgentContext {
  std::string agent_id;
  token::AgentSignature signature;  // live prompt template, tools, config
  token::PopKeyPair pop_keys;
  const Anchor* anchor = nullptr;
  BridgeIdentifier bridge;  // filled by bind_anchor
};

struct StartupReport {
  bool ok = false;
  std::vector<std::string> mismatches;  // "agent_id: reason" rows, empty when ok
};

struct ApiRequest {
  std::string method;
  std::string base_url;
  std::string path;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;  // extras; agentic headers overwrite
  // When present, checked against the agent's registered template before any
  // network traffic; a structural mismatch aborts the call.
  std::optional<std::string> live_prompt;
};

class Shim {
 public:
  using Clock = std::function<std::int64_t()>;

  Shim(ShimConfig config, std::shared_ptr<HttpClient> http, Clock clock = {},
       std::uint64_t nonce_seed = 0x5eed);

  // Checksum of this build's artifact bytes, sent as X-Shim-Checksum.
  const Checksum& self_checksum() const { return self_checksum_; }

  // Startup step 1: bind an agent to its live anchor (fills ctx.bridge).
  Result<BridgeIdentifier> bind_anchor(AgentContext& ctx);

  // Startup step 2: verify this build against the issuer's published
  // releases and every local agent against its registered checksum, then
  // seal the bridge registry. Serving is refused until this passes (unless
  // the local gates are disabled).
  StartupReport startup_verify(const std::vector<const AgentContext*>& agents);

  // Mints (or serves from cache) an intent token for the tracker's in-flight
  // step. All claims derive from tracker state and the AgentContext; issuer
  // denials surface verbatim as the failure code.
  Result<std::string> acquire_intent_token(const AgentContext& ctx,
                                           const WorkflowTracker& tracker);

  // Acquire + sign + inject + dispatch. Any HTTP status is a success carrying
  // that status; failures are local refusals, issuer denials, or transport
  // errors.
  Result<HttpResponse> call_api(const AgentContext& ctx, const WorkflowTracker& tracker,
                                const ApiRequest& request);

  // Round-trips actually made to the issuer's /token (cache observability).
  std::int64_t idp_token_requests() const;

  BridgeRegistry& bridge_registry() { return bridge_; }

 private:
  struct CachedToken {
    std::string token;
    std::int64_t expires_at = 0;
  };

  Result<std::string> request_token(const AgentContext& ctx, const WorkflowTracker& tracker,
                                    const Checksum& runtime_checksum);
  std::string fresh_nonce();

  ShimConfig config_;
  std::shared_ptr<HttpClient> http_;
  Clock clock_;
  Checksum self_checksum_;
  BridgeRegistry bridge_;

  mutable std::mutex mutex_;
  std::map<std::string, CachedToken> token_cache_;  // (agent, workflow, step) key
  std::mt19937_64 nonce_rng_;
  std::int64_t token_requests_ = 0;
  bool verified_ = false;
};

}  // namespace ajwt::shim
