#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ajwt/idp/http_server.hpp"
#include "ajwt/idp/service.hpp"
#include "ajwt/rs/http_server.hpp"
#include "ajwt/rs/trust.hpp"
#include "ajwt/shim/shim.hpp"
#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/pop.hpp"

namespace ajwt::harness {

// The two experiment phases: a legacy deployment where every process shares
// one bearer token minted with client_credentials and the resource server
// checks only scopes, and the hardened deployment where tokens are minted
// per agent and per step with proof-of-possession.
enum class Phase { kBefore, kAfter };

std::string phase_name(Phase phase);
std::optional<Phase> parse_phase(const std::string& text);

inline constexpr std::int64_t kWorldEpoch = 1719570900;
inline constexpr const char* kWorkflowId = "vulnerability_assessment_v2";
inline constexpr const char* kShimVersion = "1.4.2";
inline constexpr const char* kAudience = "api.github.com";
inline constexpr const char* kGrant = "grant-sec-tools";

// The scripted cast: a four-agent vulnerability-patching client. Agents are
// deterministic plan executors — the "model outputs" are canned, so runs are
// reproducible.
token::AgentSignature supervisor_signature();
token::AgentSignature planner_signature();
token::AgentSignature classifier_signature();
token::AgentSignature patcher_signature();
token::AgentSignature signature_of(const std::string& agent_id);
idp::WorkflowDefinition assessment_workflow();

struct RawResponse {
  int status = 0;               // 0 = transport failure
  nlohmann::json body;          // parsed when possible, else {"raw": <text>}
};

// One self-contained deployment: issuer + resource server on loopback, the
// mock repository/vulnerability routes behind the verification middleware,
// and (after phase) a shim-equipped client with all four agents registered
// and anchored. Each scenario gets a fresh World, so concurrent runs never
// share state.
class World {
 public:
  World(Phase phase, std::uint64_t seed);
  ~World();
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Phase phase() const { return phase_; }
  std::int64_t now() const { return now_->load(); }
  void advance(std::int64_t secs) { now_->fetch_add(secs); }

  const std::string& client_id() const { return client_id_; }
  const std::string& client_secret() const { return client_secret_; }
  const std::string& idp_url() const { return idp_url_; }
  const token::Checksum& shim_release() const { return shim_release_; }

  idp::IdpService& issuer() { return *issuer_; }
  rs::RsHttpServer& resource() { return *resource_; }

  // After phase only.
  shim::Shim& app_shim();
  shim::AgentContext& agent(const std::string& agent_id);
  const token::PopKeyPair& pop_keys(const std::string& agent_id) const;

  // Raw wire access — what an attacker with network reach (and, for the
  // issuer endpoints, stolen or guessed credentials) can do without the shim.
  RawResponse post_idp(const std::string& path, const nlohmann::json& body,
                       const std::map<std::string, std::string>& headers = {});
  RawResponse get_idp(const std::string& path,
                      const std::map<std::string, std::string>& headers = {});
  RawResponse send_rs(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& headers,
                      const std::string& body);

  // Hand-signs one proof-of-possession request exactly as the shim would and
  // sends it; the caller controls the token, nonce, and shim header.
  RawResponse signed_rs_call(const std::string& agent_id, const std::string& bearer_token,
                             const std::string& method, const std::string& path,
                             const std::string& body, const std::string& nonce,
                             const std::string& shim_checksum_header = "");

  // A fully legitimate token-request body for the given position in the
  // workflow; attack scripts mutate fields before posting it to /token.
  nlohmann::json token_request_body(const std::string& agent_id, const std::string& step,
                                    const std::vector<std::string>& executed_steps,
                                    const std::vector<std::string>& delegation_chain) const;

  // Evidence taps: every decision record new since the previous drain,
  // rendered one line per record.
  std::vector<std::string> drain_rs_decisions();
  std::vector<std::string> drain_idp_events();

 private:
  Phase phase_;
  std::shared_ptr<std::atomic<std::int64_t>> now_;
  std::unique_ptr<idp::IdpService> issuer_;
  std::unique_ptr<idp::IdpHttpServer> idp_server_;
  int idp_port_ = 0;
  std::string idp_url_;
  std::string client_id_;
  std::string client_secret_;
  token::Checksum shim_release_;
  std::map<std::string, token::PopKeyPair> pop_keys_;
  std::map<std::string, std::unique_ptr<shim::Anchor>> anchors_;
  std::map<std::string, shim::AgentContext> agents_;
  std::shared_ptr<rs::TrustStoreClient> trust_;
  std::unique_ptr<rs::RsHttpServer> resource_;
  int rs_port_ = 0;
  std::unique_ptr<shim::Shim> shim_;
  std::size_t decisions_seen_ = 0;
  std::size_t events_seen_ = 0;
};

}  // namespace ajwt::harness
