#include "ajwt/harness/runner.hpp"

#include <chrono>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ajwt::harness {
namespace {

std::vector<const ThreatScenario*> select(const std::vector<std::string>& ids) {
  std::vector<const ThreatScenario*> out;
  if (ids.empty()) {
    for (const auto& scenario : threat_catalog()) out.push_back(&scenario);
    return out;
  }
  for (const auto& id : ids) {
    const ThreatScenario* scenario = find_scenario(id);
    if (scenario == nullptr) throw std::invalid_argument("unknown threat id: " + id);
    out.push_back(scenario);
  }
  return out;
}

}  // namespace

Summary run_all(const RunOptions& options) {
  auto started = std::chrono::steady_clock::now();
  auto selection = select(options.threat_ids);

  Summary summary;
  summary.phase = options.phase;
  summary.seed = options.seed;
  summary.stress = options.stress;

  if (options.stress) {
    std::vector<std::future<ScenarioResult>> futures;
    futures.reserve(selection.size());
    for (std::size_t i = 0; i < selection.size(); ++i)
      futures.push_back(std::async(std::launch::async, [&, i] {
        return run_scenario(*selection[i], options.phase, options.seed + i);
      }));
    for (auto& future : futures) summary.results.push_back(future.get());
  } else {
    for (std::size_t i = 0; i < selection.size(); ++i)
      summary.results.push_back(run_scenario(*selection[i], options.phase, options.seed + i));
  }

  summary.all_matched = true;
  for (const auto& result : summary.results) {
    switch (result.outcome) {
      case Outcome::kBlocked: ++summary.blocked; break;
      case Outcome::kSucceeded: ++summary.succeeded; break;
      case Outcome::kUndetected: ++summary.undetected; break;
      case Outcome::kPartiallySucceeded: ++summary.partially_succeeded; break;
    }
    summary.all_matched = summary.all_matched && result.matched;
  }
  summary.wall_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

nlohmann::json summary_to_json(const Summary& summary) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& result : summary.results) {
    const ThreatScenario* scenario = find_scenario(result.threat_id);
    results.push_back({
        {"threat_id", result.threat_id},
        {"name", result.name},
        {"description", scenario != nullptr ? scenario->description : ""},
        {"outcome", outcome_name(result.outcome)},
        {"observed_code", result.observed_code},
        {"matched_expectation", result.matched},
        {"evidence", result.evidence},
    });
  }
  return nlohmann::json{
      {"phase", phase_name(summary.phase)},
      {"seed", summary.seed},
      {"stress", summary.stress},
      {"results", results},
      {"summary",
       {{"total", summary.results.size()},
        {"blocked", summary.blocked},
        {"succeeded", summary.succeeded},
        {"undetected", summary.undetected},
        {"partially_succeeded", summary.partially_succeeded},
        {"all_matched", summary.all_matched},
        {"wall_secs", summary.wall_secs}}},
  };
}

std::string summary_table(const Summary& summary) {
  std::ostringstream out;
  out << "phase: " << phase_name(summary.phase) << "   seed: " << summary.seed
      << (summary.stress ? "   (stress: concurrent scenarios)" : "") << "\n\n";
  out << std::left << std::setw(5) << "id" << std::setw(36) << "threat" << std::setw(21)
      << "outcome" << std::setw(30) << "code" << "verdict" << "\n";
  out << std::string(98, '-') << "\n";
  for (const auto& result : summary.results) {
    out << std::left << std::setw(5) << result.threat_id << std::setw(36) << result.name
        << std::setw(21) << outcome_name(result.outcome) << std::setw(30)
        << (result.observed_code.empty() ? "-" : result.observed_code)
        << (result.matched ? "as expected" : "UNEXPECTED") << "\n";
  }
  out << std::string(98, '-') << "\n";
  if (summary.phase == Phase::kAfter) {
    out << summary.blocked << "/" << summary.results.size() << " blocked";
  } else {
    out << summary.succeeded + summary.undetected << "/" << summary.results.size()
        << " succeeded or undetected, " << summary.partially_succeeded
        << " partially succeeded";
  }
  out << "; expectations " << (summary.all_matched ? "met" : "NOT met") << "; "
      << std::fixed << std::setprecision(1) << summary.wall_secs << "s\n";
  return out.str();
}

std::optional<HarnessConfig> HarnessConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) return std::nullopt;
  HarnessConfig config;
  if (doc.contains("phase")) {
    if (!doc["phase"].is_string()) return std::nullopt;
    auto phase = parse_phase(doc["phase"].get<std::string>());
    if (!phase) return std::nullopt;
    config.options.phase = *phase;
  }
  if (doc.contains("threats")) {
    if (!doc["threats"].is_array()) return std::nullopt;
    for (const auto& id : doc["threats"]) {
      if (!id.is_string() || find_scenario(id.get<std::string>()) == nullptr)
        return std::nullopt;
      config.options.threat_ids.push_back(id.get<std::string>());
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) return std::nullopt;
    config.options.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("stress")) {
    if (!doc["stress"].is_boolean()) return std::nullopt;
    config.options.stress = doc["stress"].get<bool>();
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) return std::nullopt;
    config.out_path = doc["out"].get<std::string>();
  }
  return config;
}

}  // namespace ajwt::harness
