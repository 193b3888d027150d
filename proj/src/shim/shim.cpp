#include "ajwt/shim/shim.hpp"

#include <ctime>

#include <json.hpp>

#include "ajwt/shim/prompt.hpp"

namespace ajwt::shim {

namespace {

std::int64_t system_now() { return static_cast<std::int64_t>(::time(nullptr)); }

std::string cache_key(const std::string& agent_id, const std::string& workflow_id,
                      const std::string& step) {
  return agent_id + '\x1f' + workflow_id + '\x1f' + step;
}

// Denial responses carry {"error": ..., "reason": ...}; the reason is the
// machine-readable code and propagates verbatim.
std::string denial_code(const HttpResponse& response) {
  nlohmann::json body = nlohmann::json::parse(response.body, nullptr, false);
  if (body.is_object()) {
    if (auto reason = body.find("reason"); reason != body.end() && reason->is_string())
      return reason->get<std::string>();
    if (auto error = body.find("error"); error != body.end() && error->is_string())
      return error->get<std::string>();
  }
  return "idp_error_" + std::to_string(response.status);
}

}  // namespace

std::string release_artifact_bytes(const std::string& version) {
  return "shim artifact bytes v" + version;
}

Shim::Shim(ShimConfig config, std::shared_ptr<HttpClient> http, Clock clock,
           std::uint64_t nonce_seed)
    : config_(std::move(config)),
      http_(std::move(http)),
      clock_(clock ? std::move(clock) : Clock(system_now)),
      nonce_rng_(nonce_seed) {
  if (config_.artifact_bytes.empty())
    config_.artifact_bytes = release_artifact_bytes(config_.version);
  self_checksum_ = token::compute_checksum(config_.artifact_bytes);
}

Result<BridgeIdentifier> Shim::bind_anchor(AgentContext& ctx) {
  if (ctx.anchor == nullptr)
    return Result<BridgeIdentifier>::failure("unknown_anchor", "agent has no live anchor");
  auto bound = bridge_.register_anchor(*ctx.anchor, ctx.agent_id, ctx.signature);
  if (bound.ok()) ctx.bridge = *bound.value;
  return bound;
}

StartupReport Shim::startup_verify(const std::vector<const AgentContext*>& agents) {
  StartupReport report;

  std::map<std::string, std::string> idp_headers{
      {"X-Shim-Checksum", self_checksum_.to_string()}};

  // Own build first: an unpublished shim must not serve at all.
  if (config_.enforce_release_check) {
    auto versions = http_->send("GET", config_.idp_base_url, "/.well-known/shim-versions",
                                idp_headers, "", "application/json");
    bool published = false;
    if (versions.ok() && versions.value->status == 200) {
      nlohmann::json doc = nlohmann::json::parse(versions.value->body, nullptr, false);
      if (doc.is_object() && doc.contains("versions"))
        for (const auto& [version, checksum] : doc["versions"].items())
          if (checksum.is_string() && checksum.get<std::string>() == self_checksum_.to_string())
            published = true;
    }
    if (!published)
      report.mismatches.push_back("shim: this build is not a release the issuer publishes");
  }

  // Registry view: the issuer's record of this client's agents.
  std::map<std::string, std::string> registered;  // agent_id → checksum string
  auto listing = http_->send("GET", config_.idp_base_url,
                             "/agents?client_id=" + config_.client_id,
                             {{"X-Shim-Checksum", self_checksum_.to_string()},
                              {"X-Client-Secret", config_.client_secret}},
                             "", "application/json");
  if (!listing.ok() || listing.value->status != 200) {
    report.mismatches.push_back("registry: agent listing unavailable from issuer");
  } else {
    nlohmann::json doc = nlohmann::json::parse(listing.value->body, nullptr, false);
    if (doc.is_object() && doc.contains("agents"))
      for (const auto& row : doc["agents"])
        if (row.is_object() && row.contains("agent_id") && row.contains("agent_checksum"))
          registered[row["agent_id"].get<std::string>()] =
              row["agent_checksum"].get<std::string>();

    for (const AgentContext* ctx : agents) {
      std::string live = token::agent_signature_checksum(ctx->signature).to_string();
      auto row = registered.find(ctx->agent_id);
      if (row == registered.end())
        report.mismatches.push_back(ctx->agent_id + ": not registered with the issuer");
      else if (row->second != live)
        report.mismatches.push_back(ctx->agent_id + ": checksum drift since registration");
      else if (ctx->bridge.checksum_at_startup.to_string() != live)
        report.mismatches.push_back(ctx->agent_id + ": anchor binding is stale");
    }
  }

  bridge_.seal();
  report.ok = report.mismatches.empty();
  verified_ = report.ok;
  return report;
}

Result<std::string> Shim::acquire_intent_token(const AgentContext& ctx,
                                               const WorkflowTracker& tracker) {
  using R = Result<std::string>;
  if (config_.enforce_release_check && !verified_)
    return R::failure("startup_not_verified",
                      "startup verification has not passed; refusing to serve");

  std::string step = tracker.current_step();
  if (step.empty())
    return R::failure("no_step_tracked", "track a workflow step before requesting a token");

  // Identity gate: the live anchor must be the one registered for this agent.
  if (ctx.anchor == nullptr)
    return R::failure("unknown_anchor", "agent has no live anchor");
  auto anchored = bridge_.resolve_runtime_checksum(*ctx.anchor, ctx.agent_id);
  if (!anchored.ok()) return R::failure(anchored.error, anchored.detail);

  // The runtime checksum is recomputed from the live identity material on
  // every acquisition; drift since registration is the issuer's to judge.
  Checksum runtime_checksum = token::agent_signature_checksum(ctx.signature);

  std::string key = cache_key(ctx.agent_id, tracker.workflow_id(), step);
  {
    std::scoped_lock lock(mutex_);
    auto cached = token_cache_.find(key);
    if (cached != token_cache_.end() &&
        cached->second.expires_at - config_.cache_margin_secs > clock_())
      return R::success(std::string(cached->second.token));
  }

  return request_token(ctx, tracker, runtime_checksum);
}

Result<std::string> Shim::request_token(const AgentContext& ctx, const WorkflowTracker& tracker,
                                        const Checksum& runtime_checksum) {
  using R = Result<std::string>;
  nlohmann::json body{{"grant_type", "agent_checksum"},
                      {"client_id", config_.client_id},
                      {"client_secret", config_.client_secret},
                      {"agent_id", ctx.agent_id},
                      {"runtime_checksum", runtime_checksum.to_string()},
                      {"workflow_id", tracker.workflow_id()},
                      {"workflow_step", tracker.current_step()},
                      {"executed_steps", tracker.prior_steps()},
                      {"delegation_chain", tracker.delegation_chain()},
                      {"execution_context", tracker.execution_context()},
                      {"shim_checksum", self_checksum_.to_string()}};
  if (!config_.audience.empty()) body["audience"] = config_.audience;

  auto response = http_->send("POST", config_.idp_base_url, "/token",
                              {{"X-Shim-Checksum", self_checksum_.to_string()}}, body.dump(),
                              "application/json");
  if (!response.ok()) return R::failure(response.error, response.detail);

  {
    std::scoped_lock lock(mutex_);
    ++token_requests_;
  }

  if (response.value->status != 200)
    return R::failure(denial_code(*response.value), response.value->body);

  nlohmann::json grant = nlohmann::json::parse(response.value->body, nullptr, false);
  if (!grant.is_object() || !grant.contains("access_token") || !grant.contains("expires_in"))
    return R::failure("idp_protocol_error", "token response missing members");

  std::string token = grant["access_token"].get<std::string>();
  std::int64_t expires_in = grant["expires_in"].get<std::int64_t>();
  {
    std::scoped_lock lock(mutex_);
    token_cache_[cache_key(ctx.agent_id, tracker.workflow_id(), tracker.current_step())] =
        CachedToken{token, clock_() + expires_in};
  }
  return R::success(std::move(token));
}

Result<HttpResponse> Shim::call_api(const AgentContext& ctx, const WorkflowTracker& tracker,
                                    const ApiRequest& request) {
  using R = Result<HttpResponse>;

  // Structural prompt check runs before any network traffic.
  if (request.live_prompt) {
    auto extracted = validate_live_prompt(ctx.signature, *request.live_prompt);
    if (!extracted.ok()) return R::failure(extracted.error, extracted.detail);
  }

  auto token = acquire_intent_token(ctx, tracker);
  if (!token.ok()) return R::failure(token.error, token.detail);

  std::string authorization = "Bearer " + *token.value;
  token::SignatureHeaders signed_headers =
      token::sign_http_request(request.method, request.path, authorization,
                               token::compute_checksum(request.body), ctx.pop_keys, clock_(),
                               fresh_nonce());

  std::map<std::string, std::string> headers = request.headers;
  headers["Authorization"] = authorization;
  headers["X-Shim-Checksum"] = self_checksum_.to_string();
  headers["Signature-Input"] = signed_headers.signature_input;
  headers["Signature"] = signed_headers.signature;

  return http_->send(request.method, request.base_url, request.path, headers, request.body,
                     request.content_type);
}

std::int64_t Shim::idp_token_requests() const {
  std::scoped_lock lock(mutex_);
  return token_requests_;
}

std::string Shim::fresh_nonce() {
  std::scoped_lock lock(mutex_);
  static constexpr char kHex[] = "0123456789abcdef";
  std::uint64_t bits = nonce_rng_();
  std::string nonce(16, '0');
  for (int i = 0; i < 16; ++i) nonce[i] = kHex[(bits >> (i * 4)) & 0xF];
  return nonce;
}

}  // namespace ajwt::shim
