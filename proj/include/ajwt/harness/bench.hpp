#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace ajwt::harness {

struct BenchResult {
  std::string name;
  std::size_t iterations = 0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p50_budget_us = 0.0;  // 0 = informational, no budget
  double p95_budget_us = 0.0;
  bool pass = true;  // within every non-zero budget
};

// Latency of the enforcement hot paths, measured in-process with no sockets:
//   verify_request_intent   — full middleware verification of a valid
//                             proof-of-possession request (budget: p50 < 1 ms,
//                             p95 < 2 ms)
//   shim_identity_path      — anchor resolution, live checksum recomputation,
//                             and claim assembly (budget: p50 < 2 ms)
//   verify_request_legacy   — plain bearer verification, reported for delta
//                             context only
// Every iteration of the intent benchmark presents a distinct signature, so
// the replay cache is exercised at full size rather than bypassed.
std::vector<BenchResult> run_benchmarks(std::size_t iterations = 10000);

bool all_within_budget(const std::vector<BenchResult>& results);
nlohmann::json bench_to_json(const std::vector<BenchResult>& results);
std::string bench_table(const std::vector<BenchResult>& results);

}  // namespace ajwt::harness
