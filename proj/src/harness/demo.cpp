#include "ajwt/harness/demo.hpp"

#include <sstream>

#include "ajwt/harness/world.hpp"

namespace ajwt::harness {
namespace {

struct PlannedCall {
  const char* step;
  const char* agent;
  const char* method;  // empty = the step is pure orchestration
  const char* path;
  const char* body;
};

// The legitimate walk: who executes each step and which guarded endpoint the
// step touches. The intake step only decomposes the task, so it never leaves
// the process.
const std::vector<PlannedCall>& plan() {
  static const std::vector<PlannedCall> kPlan = {
      {"intake", "supervisor", "", "", ""},
      {"scan_manifests", "planner", "GET", "/repos/org/payment-service/manifests", ""},
      {"classify_ecosystems", "classifier", "GET", "/vuln/query", ""},
      {"fetch_vulnerabilities", "planner", "GET", "/vuln/query", ""},
      {"triage_and_plan", "planner", "GET", "/repos/org/payment-service/manifests", ""},
      {"create_patches", "patcher", "POST", "/repos/org/payment-service/patches",
       R"({"title":"Bump lodash to 4.17.21"})"},
      {"merge_pr", "patcher", "POST", "/repos/org/payment-service/merges",
       R"({"pr":401})"},
  };
  return kPlan;
}

}  // namespace

bool DemoReport::ok() const {
  if (steps.empty() || !idp_log_valid || !rs_log_valid) return false;
  if (intent_token.empty() || legacy_token.empty()) return false;
  for (const DemoStep& step : steps)
    if (!step.method.empty() && step.status != 200) return false;
  return true;
}

DemoReport run_demo(std::uint64_t seed) {
  World world(Phase::kAfter, seed);
  shim::Shim& app_shim = world.app_shim();
  const std::string rs_url = "http://127.0.0.1:" + std::to_string(world.resource().port());

  DemoReport report;
  report.seed = seed;

  shim::WorkflowTracker tracker(kWorkflowId);
  tracker.execution_context() = {{"repository", "org/payment-service"}};

  for (const PlannedCall& call : plan()) {
    tracker.track_step(call.step, call.agent);
    world.advance(1);

    DemoStep row;
    row.step = call.step;
    row.agent_id = call.agent;
    row.method = call.method;
    row.path = call.path;
    if (row.method.empty()) {
      report.steps.push_back(std::move(row));
      continue;
    }

    shim::ApiRequest request;
    request.method = call.method;
    request.base_url = rs_url;
    request.path = call.path;
    request.body = call.body;
    auto response = app_shim.call_api(world.agent(call.agent), tracker, request);
    if (response.ok()) {
      row.status = response.value->status;
    } else {
      row.note = response.error;
    }

    // The patching step's token doubles as the inspectable sample; the cache
    // returns the very token the call above used.
    if (row.step == "create_patches") {
      auto minted = app_shim.acquire_intent_token(world.agent(call.agent), tracker);
      if (minted.ok()) report.intent_token = *minted.value;
    }
    report.steps.push_back(std::move(row));
  }

  report.issuer_mints = app_shim.idp_token_requests();

  auto legacy = world.post_idp("/token", {{"grant_type", "client_credentials"},
                                          {"client_id", world.client_id()},
                                          {"client_secret", world.client_secret()}});
  if (legacy.status == 200) report.legacy_token = legacy.body.value("access_token", "");

  report.jwks = world.get_idp("/.well-known/jwks").body;
  report.idp_log_valid = world.get_idp("/log/verify").body.value("valid", false);
  report.rs_log_valid = world.resource().verify_decision_log();
  report.issuer_events = world.drain_idp_events();
  report.resource_decisions = world.drain_rs_decisions();
  return report;
}

nlohmann::json demo_to_json(const DemoReport& report) {
  nlohmann::json steps = nlohmann::json::array();
  for (const DemoStep& step : report.steps)
    steps.push_back({{"step", step.step},
                     {"agent_id", step.agent_id},
                     {"method", step.method},
                     {"path", step.path},
                     {"status", step.status},
                     {"note", step.note}});
  return {{"seed", report.seed},
          {"steps", std::move(steps)},
          {"issuer_mints", report.issuer_mints},
          {"idp_log_valid", report.idp_log_valid},
          {"rs_log_valid", report.rs_log_valid},
          {"issuer_events", report.issuer_events},
          {"resource_decisions", report.resource_decisions},
          {"intent_token", report.intent_token},
          {"legacy_token", report.legacy_token},
          {"jwks", report.jwks},
          {"ok", report.ok()}};
}

std::string demo_table(const DemoReport& report) {
  std::ostringstream out;
  out << "golden-path demo (seed " << report.seed << ")\n";
  auto pad = [](const std::string& text, std::size_t width) {
    return text.size() >= width ? text + " " : text + std::string(width - text.size(), ' ');
  };
  out << pad("step", 22) << pad("agent", 12) << pad("call", 44) << "status\n";
  for (const DemoStep& step : report.steps) {
    std::string call = step.method.empty() ? "(no api call)" : step.method + " " + step.path;
    std::string status = step.method.empty() ? "-" : std::to_string(step.status);
    if (!step.note.empty()) status += " (" + step.note + ")";
    out << pad(step.step, 22) << pad(step.agent_id, 12) << pad(call, 44) << status << "\n";
  }
  out << "issuer mints: " << report.issuer_mints
      << " | issuer log: " << (report.idp_log_valid ? "valid" : "INVALID")
      << " | decision log: " << (report.rs_log_valid ? "valid" : "INVALID") << "\n"
      << "workflow " << (report.ok() ? "completed: every call verified and logged"
                                     : "INCOMPLETE: see step notes")
      << "\n";
  return out.str();
}

}  // namespace ajwt::harness
