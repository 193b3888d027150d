#include "ajwt/harness/world.hpp"

#include <httplib.h>

#include <sstream>
#include <stdexcept>
#include <utility>

#include "ajwt/idp/store.hpp"
#include "ajwt/token/canonical.hpp"
#include "ajwt/token/crypto.hpp"

namespace ajwt::harness {
namespace {

httplib::Headers to_httplib(const std::map<std::string, std::string>& headers) {
  httplib::Headers out;
  for (const auto& [key, value] : headers) out.emplace(key, value);
  return out;
}

RawResponse to_raw(const httplib::Result& res) {
  RawResponse out;
  if (!res) return out;
  out.status = res->status;
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  out.body = parsed.is_discarded() ? nlohmann::json{{"raw", res->body}} : parsed;
  return out;
}

rs::PolicyConfig world_policy(Phase phase) {
  auto steps = [&](std::vector<std::string> ids) {
    std::set<std::pair<std::string, std::string>> out;
    if (phase == Phase::kAfter)
      for (auto& id : ids) out.emplace(kWorkflowId, std::move(id));
    return out;
  };
  bool intent = phase == Phase::kAfter;
  rs::PolicyConfig policy;
  policy.endpoints = {
      {"GET", "/repos/org/payment-service/manifests", {"repo:read"},
       steps({"scan_manifests", "triage_and_plan"}), intent},
      {"GET", "/vuln/query", {"vuln:read"},
       steps({"classify_ecosystems", "fetch_vulnerabilities"}), intent},
      {"POST", "/repos/org/payment-service/patches", {"repo:write"},
       steps({"create_patches"}), intent},
      {"POST", "/repos/org/payment-service/merges", {"repo:write"},
       steps({"merge_pr"}), intent},
  };
  return policy;
}

void mount_mock_routes(rs::RsHttpServer& server) {
  auto canned = [](nlohmann::json body) {
    return [body = std::move(body)](const httplib::Request&, httplib::Response& res,
                                    const token::TokenClaims&) {
      res.set_content(body.dump(), "application/json");
    };
  };
  server.route("GET", "/repos/org/payment-service/manifests",
               canned({{"manifests", {"package-lock.json", "requirements.txt"}}}));
  server.route("GET", "/vuln/query",
               canned({{"advisories",
                        {{{"id", "GHSA-77vh"}, {"package", "openssl"}, {"severity", "high"}}}}}));
  server.route("POST", "/repos/org/payment-service/patches",
               canned({{"pull_request", "PR-401"}}));
  server.route("POST", "/repos/org/payment-service/merges", canned({{"merged", true}}));
}

}  // namespace

std::string phase_name(Phase phase) {
  return phase == Phase::kBefore ? "before" : "after";
}

std::optional<Phase> parse_phase(const std::string& text) {
  if (text == "before") return Phase::kBefore;
  if (text == "after") return Phase::kAfter;
  return std::nullopt;
}

token::AgentSignature supervisor_signature() {
  token::AgentSignature sig;
  sig.prompt_template =
      "You coordinate a dependency vulnerability assessment for {repository}. Route each "
      "stage to the agent responsible for it and stop on any policy refusal.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"route_task", "(stage: str, agent: str) -> str",
                "Hand a workflow stage to another agent"}};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0"}};
  return sig;
}

token::AgentSignature planner_signature() {
  token::AgentSignature sig;
  sig.prompt_template =
      "You plan remediation for {repository}. Read dependency manifests, fetch advisories "
      "for the flagged ecosystems, and produce an ordered patch plan.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"read_manifest", "(path: str) -> str", "Read a dependency manifest"},
               {"plan_patches", "(advisories: list) -> list", "Order upgrades by severity"}};
  sig.config = {{"model", "gpt-4o-mini"}, {"temperature", "0"}};
  return sig;
}

token::AgentSignature classifier_signature() {
  token::AgentSignature sig;
  sig.prompt_template =
      "You classify dependency ecosystems for {repository} so advisories can be fetched "
      "per ecosystem.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"classify_ecosystem", "(manifest: str) -> str",
                "Name the package ecosystem of a manifest"}};
  sig.config = {{"model", "gpt-4o-mini"}, {"temperature", "0"}};
  return sig;
}

token::AgentSignature patcher_signature() {
  token::AgentSignature sig;
  sig.prompt_template =
      "You apply approved dependency upgrades to {repository} and open a pull request "
      "for review.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"write_patch", "(diff: str) -> str", "Apply a patch to a working tree"},
               {"open_pr", "(title: str, body: str) -> str", "Open a pull request"}};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0.2"}};
  return sig;
}

token::AgentSignature signature_of(const std::string& agent_id) {
  if (agent_id == "supervisor") return supervisor_signature();
  if (agent_id == "planner") return planner_signature();
  if (agent_id == "classifier") return classifier_signature();
  if (agent_id == "patcher") return patcher_signature();
  throw std::invalid_argument("unknown agent: " + agent_id);
}

idp::WorkflowDefinition assessment_workflow() {
  idp::WorkflowDefinition wf;
  wf.workflow_id = kWorkflowId;
  wf.steps = {
      {"intake", {"supervisor"}, {}},
      {"scan_manifests", {"planner"}, {"repo:read"}},
      {"classify_ecosystems", {"classifier"}, {"vuln:read"}},
      {"fetch_vulnerabilities", {"planner"}, {"vuln:read"}},
      {"triage_and_plan", {"planner"}, {"repo:read", "vuln:read"}},
      {"create_patches", {"patcher"}, {"repo:write"}},
      {"merge_pr", {"patcher"}, {"repo:write"}},
  };
  wf.edges = {{"intake", "scan_manifests"},
              {"scan_manifests", "classify_ecosystems"},
              {"classify_ecosystems", "fetch_vulnerabilities"},
              {"fetch_vulnerabilities", "triage_and_plan"},
              {"triage_and_plan", "create_patches"},
              {"create_patches", "merge_pr"}};
  return wf;
}

World::World(Phase phase, std::uint64_t seed) : phase_(phase) {
  now_ = std::make_shared<std::atomic<std::int64_t>>(kWorldEpoch);
  auto clock = [now = now_] { return now->load(); };

  idp::IdpConfig config;
  config.authorization_grants = {
      {kGrant, {"repo:read", "repo:write", "vuln:read"}},
      {"grant-read-only", {"repo:read"}},
  };
  std::string mac_key = "harness-issuer-chain-mac-key";
  config.chain_mac_key.assign(mac_key.begin(), mac_key.end());
  issuer_ = std::make_unique<idp::IdpService>(config, token::IssuerKey::generate("idp_key_2024"),
                                              std::make_unique<idp::InMemoryBackend>(), clock,
                                              seed);

  shim_release_ = token::compute_checksum(shim::release_artifact_bytes(kShimVersion));
  if (phase_ == Phase::kAfter) issuer_->add_shim_version(kShimVersion, shim_release_);

  idp_server_ = std::make_unique<idp::IdpHttpServer>(*issuer_);
  idp_port_ = idp_server_->start();
  idp_url_ = "http://127.0.0.1:" + std::to_string(idp_port_);

  auto client = issuer_->register_client(
      kGrant, token::compute_checksum("vuln assessment client bundle").to_string());
  if (!client.ok()) throw std::runtime_error("world: client registration failed");
  client_id_ = client.value->client_id;
  client_secret_ = client.value->client_secret;

  if (phase_ == Phase::kAfter) {
    for (const std::string id : {"supervisor", "planner", "classifier", "patcher"}) {
      auto keys = token::PopKeyPair::generate(id, kWorldEpoch);
      auto record = issuer_->register_agent(client_id_, client_secret_, id, signature_of(id),
                                            keys.public_key, keys.kid, "2.1.0");
      if (!record.ok()) throw std::runtime_error("world: agent registration failed: " + id);
      pop_keys_.emplace(id, std::move(keys));
    }
    auto workflow = issuer_->register_workflow(client_id_, client_secret_, assessment_workflow());
    if (!workflow.ok()) throw std::runtime_error("world: workflow registration failed");
  }

  trust_ = std::make_shared<rs::TrustStoreClient>(rs::TrustStoreClient::http_fetcher(idp_url_),
                                                  issuer_->issuer(), kAudience, 300);
  resource_ = std::make_unique<rs::RsHttpServer>(
      world_policy(phase_), [trust = trust_](std::int64_t at) { return trust->material(at); },
      clock);
  mount_mock_routes(*resource_);
  rs_port_ = resource_->start();

  if (phase_ == Phase::kAfter) {
    shim::ShimConfig shim_config;
    shim_config.idp_base_url = idp_url_;
    shim_config.client_id = client_id_;
    shim_config.client_secret = client_secret_;
    shim_config.version = kShimVersion;
    shim_ = std::make_unique<shim::Shim>(shim_config, std::make_shared<shim::HttplibClient>(),
                                         clock, seed ^ 0x5eedULL);
    for (const std::string id : {"supervisor", "planner", "classifier", "patcher"}) {
      auto& anchor = anchors_[id];
      anchor = std::make_unique<shim::Anchor>();
      shim::AgentContext ctx;
      ctx.agent_id = id;
      ctx.signature = signature_of(id);
      ctx.pop_keys = pop_keys_.at(id);
      ctx.anchor = anchor.get();
      agents_.emplace(id, std::move(ctx));
      auto bound = shim_->bind_anchor(agents_.at(id));
      if (!bound.ok()) throw std::runtime_error("world: bind_anchor failed: " + bound.error);
    }
    std::vector<const shim::AgentContext*> roster;
    for (const auto& [id, ctx] : agents_) roster.push_back(&ctx);
    auto report = shim_->startup_verify(roster);
    if (!report.ok)
      throw std::runtime_error("world: startup verification failed: " +
                               (report.mismatches.empty() ? "?" : report.mismatches.front()));
  }
}

World::~World() {
  if (resource_) resource_->stop();
  if (idp_server_) idp_server_->stop();
}

shim::Shim& World::app_shim() {
  if (!shim_) throw std::logic_error("app_shim is only present in the after phase");
  return *shim_;
}

shim::AgentContext& World::agent(const std::string& agent_id) {
  auto it = agents_.find(agent_id);
  if (it == agents_.end()) throw std::logic_error("no such agent context: " + agent_id);
  return it->second;
}

const token::PopKeyPair& World::pop_keys(const std::string& agent_id) const {
  return pop_keys_.at(agent_id);
}

RawResponse World::post_idp(const std::string& path, const nlohmann::json& body,
                            const std::map<std::string, std::string>& headers) {
  httplib::Client http("127.0.0.1", idp_port_);
  return to_raw(http.Post(path, to_httplib(headers), body.dump(), "application/json"));
}

RawResponse World::get_idp(const std::string& path,
                           const std::map<std::string, std::string>& headers) {
  httplib::Client http("127.0.0.1", idp_port_);
  return to_raw(http.Get(path, to_httplib(headers)));
}

RawResponse World::send_rs(const std::string& method, const std::string& path,
                           const std::map<std::string, std::string>& headers,
                           const std::string& body) {
  httplib::Client http("127.0.0.1", rs_port_);
  httplib::Headers h = to_httplib(headers);
  if (method == "GET") return to_raw(http.Get(path, h));
  if (method == "POST") return to_raw(http.Post(path, h, body, "application/json"));
  if (method == "PUT") return to_raw(http.Put(path, h, body, "application/json"));
  if (method == "DELETE") return to_raw(http.Delete(path, h, body, "application/json"));
  throw std::invalid_argument("send_rs: unsupported method " + method);
}

RawResponse World::signed_rs_call(const std::string& agent_id, const std::string& bearer_token,
                                  const std::string& method, const std::string& path,
                                  const std::string& body, const std::string& nonce,
                                  const std::string& shim_checksum_header) {
  std::string authorization = "Bearer " + bearer_token;
  auto signed_headers =
      token::sign_http_request(method, path, authorization, token::compute_checksum(body),
                               pop_keys_.at(agent_id), now(), nonce);
  std::map<std::string, std::string> headers{
      {"Authorization", authorization},
      {"Signature-Input", signed_headers.signature_input},
      {"Signature", signed_headers.signature},
      {"X-Shim-Checksum",
       shim_checksum_header.empty() ? shim_release_.to_string() : shim_checksum_header},
  };
  return send_rs(method, path, headers, body);
}

nlohmann::json World::token_request_body(const std::string& agent_id, const std::string& step,
                                         const std::vector<std::string>& executed_steps,
                                         const std::vector<std::string>& delegation_chain) const {
  return nlohmann::json{
      {"grant_type", "agent_checksum"},
      {"client_id", client_id_},
      {"client_secret", client_secret_},
      {"agent_id", agent_id},
      {"runtime_checksum", token::agent_signature_checksum(signature_of(agent_id)).to_string()},
      {"workflow_id", kWorkflowId},
      {"workflow_step", step},
      {"executed_steps", executed_steps},
      {"delegation_chain", delegation_chain},
      {"execution_context", {{"repository", "org/payment-service"}}},
      {"shim_checksum", shim_release_.to_string()},
      {"audience", kAudience},
  };
}

std::vector<std::string> World::drain_rs_decisions() {
  std::vector<std::string> out;
  auto records = resource_->decisions();
  for (std::size_t i = decisions_seen_; i < records.size(); ++i) {
    const auto& r = records[i];
    std::ostringstream line;
    line << "resource #" << r.sequence_no << " " << r.method << " " << r.path << " -> "
         << r.outcome;
    if (!r.agent_id.empty()) line << " agent=" << r.agent_id;
    if (!r.step.empty()) line << " step=" << r.step;
    if (!r.jti.empty()) line << " jti=" << r.jti;
    out.push_back(line.str());
  }
  decisions_seen_ = records.size();
  return out;
}

std::vector<std::string> World::drain_idp_events() {
  std::vector<std::string> out;
  auto events = issuer_->events();
  for (std::size_t i = events_seen_; i < events.size(); ++i) {
    const auto& e = events[i];
    std::ostringstream line;
    line << "issuer #" << e.sequence_no << " token " << e.outcome;
    if (!e.agent_id.empty()) line << " agent=" << e.agent_id;
    if (!e.step.empty()) line << " step=" << e.step;
    out.push_back(line.str());
  }
  events_seen_ = events.size();
  return out;
}

}  // namespace ajwt::harness
