#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ajwt/harness/scenarios.hpp"

namespace ajwt::harness {

struct RunOptions {
  Phase phase = Phase::kAfter;
  std::vector<std::string> threat_ids;  // empty = the full catalog
  std::uint64_t seed = 1234;
  bool stress = false;  // run the selected scenarios concurrently, one World each
};

struct Summary {
  Phase phase = Phase::kAfter;
  std::uint64_t seed = 0;
  bool stress = false;
  std::vector<ScenarioResult> results;  // catalog order
  int blocked = 0;
  int succeeded = 0;
  int undetected = 0;
  int partially_succeeded = 0;
  bool all_matched = false;  // every scenario behaved as its phase expects
  double wall_secs = 0.0;
};

// Runs the selected scenarios (sequentially, or concurrently under stress)
// and aggregates outcomes. Throws std::invalid_argument on an unknown id.
Summary run_all(const RunOptions& options);

// Machine-readable results document.
nlohmann::json summary_to_json(const Summary& summary);

// Human-readable fixed-width table with a verdict footer.
std::string summary_table(const Summary& summary);

// Run selection loaded from a config document:
//   {"phase": "after", "threats": ["T2","T8"], "seed": 7, "stress": false,
//    "out": "report.json"}
// Every field is optional; unknown phases or threat ids are rejected.
struct HarnessConfig {
  RunOptions options;
  std::string out_path;  // empty = stdout only

  static std::optional<HarnessConfig> from_json(const nlohmann::json& doc);
};

}  // namespace ajwt::harness
