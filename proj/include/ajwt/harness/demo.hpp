#pragma once

// One clean end-to-end run of the vulnerability-assessment workflow in a
// hardened deployment: four agents walk all seven steps, every API call is
// minted per step, signed, verified by the middleware, and logged on both
// sides. The report carries sample tokens and the issuer's key set so the
// run can be inspected offline afterwards.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ajwt::harness {

struct DemoStep {
  std::string step;
  std::string agent_id;
  std::string method;  // empty when the step makes no API call
  std::string path;
  int status = 0;      // HTTP status of the guarded call; 0 when no call
  std::string note;    // local refusal or issuer denial when the call failed
};

struct DemoReport {
  std::uint64_t seed = 0;
  std::vector<DemoStep> steps;
  std::int64_t issuer_mints = 0;  // /token round-trips the walk needed
  bool idp_log_valid = false;
  bool rs_log_valid = false;
  std::vector<std::string> issuer_events;
  std::vector<std::string> resource_decisions;
  std::string intent_token;  // token minted for the patching step
  std::string legacy_token;  // same client through plain client_credentials
  nlohmann::json jwks;       // issuer public keys (for offline inspection)

  // True when every guarded call returned 200 and both audit logs verify.
  bool ok() const;
};

DemoReport run_demo(std::uint64_t seed);

nlohmann::json demo_to_json(const DemoReport& report);
std::string demo_table(const DemoReport& report);

}  // namespace ajwt::harness
