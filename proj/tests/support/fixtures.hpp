#pragma once

// Shared test fixtures: the four-agent vulnerability-patching deployment used
// across service, middleware, and end-to-end tests.
//
//   supervisor ──intake──▶ planner ──scan_manifests──▶ classifier ──…
//
// DAG: intake → scan_manifests → classify_ecosystems → fetch_vulnerabilities
//      → triage_and_plan → create_patches → merge_pr

#include <cstdint>
#include <memory>
#include <string>

#include "ajwt/idp/service.hpp"
#include "ajwt/token/agent_signature.hpp"
#include "ajwt/token/pop.hpp"

namespace fixtures {

inline constexpr std::int64_t kEpoch = 1719570900;
inline constexpr const char* kWorkflowId = "vulnerability_assessment_v2";
inline constexpr const char* kGrant = "grant-sec-tools";
inline constexpr const char* kShimVersion = "1.4.2";

inline ajwt::token::AgentSignature supervisor_signature() {
  ajwt::token::AgentSignature sig;
  sig.prompt_template =
      "You are the supervisor of a vulnerability patching crew. Coordinate the workflow for "
      "{repository} and delegate each step to the responsible agent.";
  sig.substitution_slots = {"repository"};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0"}};
  return sig;
}

inline ajwt::token::AgentSignature planner_signature() {
  ajwt::token::AgentSignature sig;
  sig.prompt_template =
      "You are a dependency analysis planner. Repository: {repository}. Scan manifests, fetch "
      "known vulnerabilities, and produce a triage plan for {task}.";
  sig.substitution_slots = {"repository", "task"};
  sig.tools = {{"read_manifest", "(path: str) -> str", "Read dependency manifests"},
               {"query_osv", "(purl: str) -> list", "Query the vulnerability database"}};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0.1"}};
  return sig;
}

inline ajwt::token::AgentSignature classifier_signature() {
  ajwt::token::AgentSignature sig;
  sig.prompt_template =
      "You classify dependency ecosystems for {repository}. Emit one ecosystem label per "
      "manifest.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"list_ecosystems", "() -> list", "Enumerate supported ecosystems"}};
  sig.config = {{"model", "gpt-4o-mini"}, {"temperature", "0"}};
  return sig;
}

inline ajwt::token::AgentSignature patcher_signature() {
  ajwt::token::AgentSignature sig;
  sig.prompt_template =
      "You write dependency upgrade patches for {repository}. Apply the triage plan and open "
      "a pull request.";
  sig.substitution_slots = {"repository"};
  sig.tools = {{"write_patch", "(diff: str) -> str", "Apply a patch to a working tree"},
               {"open_pr", "(title: str, body: str) -> str", "Open a pull request"}};
  sig.config = {{"model", "gpt-4o"}, {"temperature", "0.2"}};
  return sig;
}

inline ajwt::idp::WorkflowDefinition patch_workflow() {
  ajwt::idp::WorkflowDefinition wf;
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

inline ajwt::idp::IdpConfig idp_config() {
  ajwt::idp::IdpConfig config;
  config.authorization_grants = {
      {kGrant, {"repo:read", "repo:write", "vuln:read"}},
      {"grant-read-only", {"repo:read"}},
  };
  std::string key = "idp-chain-macs-are-internal";
  config.chain_mac_key.assign(key.begin(), key.end());
  return config;
}

struct SeededIdp {
  std::unique_ptr<ajwt::idp::IdpService> service;
  std::string client_id;
  std::string client_secret;
  ajwt::token::Checksum shim_checksum;
  // PoP key pairs as the agents hold them (the IDP stores only public halves).
  std::map<std::string, ajwt::token::PopKeyPair> pop_keys;
  std::map<std::string, ajwt::token::Checksum> agent_checksums;
};

// Registers the client, all four agents, the workflow, and one shim release.
inline SeededIdp make_seeded_idp(std::function<std::int64_t()> clock,
                                 std::uint64_t seed = 1234) {
  SeededIdp out;
  out.service = std::make_unique<ajwt::idp::IdpService>(
      idp_config(), ajwt::token::IssuerKey::generate("idp_key_2024"),
      std::make_unique<ajwt::idp::InMemoryBackend>(), clock, seed);

  out.shim_checksum = ajwt::token::compute_checksum("shim artifact bytes v" +
                                                    std::string(kShimVersion));
  out.service->add_shim_version(kShimVersion, out.shim_checksum);

  auto client = out.service->register_client(
      kGrant, ajwt::token::compute_checksum("client app bundle").to_string());
  out.client_id = client.value->client_id;
  out.client_secret = client.value->client_secret;

  auto add_agent = [&](const std::string& id, const ajwt::token::AgentSignature& sig) {
    auto keys = ajwt::token::PopKeyPair::generate(id, clock());
    auto record = out.service->register_agent(out.client_id, out.client_secret, id, sig,
                                              keys.public_key, keys.kid, "2.1.0");
    out.agent_checksums[id] = record.value->agent_checksum;
    out.pop_keys.emplace(id, std::move(keys));
  };
  add_agent("supervisor", supervisor_signature());
  add_agent("planner", planner_signature());
  add_agent("classifier", classifier_signature());
  add_agent("patcher", patcher_signature());

  out.service->register_workflow(out.client_id, out.client_secret, patch_workflow());
  return out;
}

// A well-formed request for the fetch_vulnerabilities step, ready to mutate.
inline ajwt::idp::TokenRequest fetch_request(const SeededIdp& idp) {
  ajwt::idp::TokenRequest request;
  request.grant_type = "agent_checksum";
  request.client_id = idp.client_id;
  request.client_secret = idp.client_secret;
  request.agent_id = "planner";
  request.runtime_checksum = idp.agent_checksums.at("planner");
  request.workflow_id = kWorkflowId;
  request.workflow_step = "fetch_vulnerabilities";
  request.executed_steps = {"intake", "scan_manifests", "classify_ecosystems"};
  request.delegation_chain = {"supervisor", "planner", "classifier", "planner"};
  request.execution_context = {{"repository", "org/payment-service"}, {"branch", "main"}};
  request.shim_checksum = idp.shim_checksum;
  return request;
}

}  // namespace fixtures
