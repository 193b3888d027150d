#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ajwt/harness/world.hpp"

namespace ajwt::harness {

// What a threat script observed when run against one phase.
//   succeeded           — the attack achieved its goal
//   partially_succeeded — part of the goal achieved, part refused
//   undetected          — nothing in the system could even see the attack
//   blocked             — refused with an attributable code
enum class Outcome { kSucceeded, kPartiallySucceeded, kUndetected, kBlocked };

std::string outcome_name(Outcome outcome);

struct ThreatScenario {
  std::string threat_id;  // "T1" .. "T12"
  std::string name;
  std::string description;
  Outcome expected_before;                       // legacy deployment
  std::vector<std::string> expected_after_codes; // any of these codes = blocked as designed
};

// All twelve scripted threats, in id order.
const std::vector<ThreatScenario>& threat_catalog();
const ThreatScenario* find_scenario(const std::string& threat_id);

struct ScenarioResult {
  std::string threat_id;
  std::string name;
  Phase phase = Phase::kAfter;
  Outcome outcome = Outcome::kSucceeded;
  std::string observed_code;  // denial or local-refusal code; empty when nothing refused
  bool matched = false;       // observation equals the scenario's expectation for the phase
  std::vector<std::string> evidence;  // narration plus every issuer/resource decision record
};

// Runs one scripted attack in a fresh, isolated World. Deterministic for a
// fixed (scenario, phase, seed) triple.
ScenarioResult run_scenario(const ThreatScenario& scenario, Phase phase, std::uint64_t seed);

}  // namespace ajwt::harness
