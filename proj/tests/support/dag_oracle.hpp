#pragma once

// Brute-force legality oracle for workflow DAGs, independent of the
// production implementation: enumerate every path that starts at a source
// node, then define "executed ++ [next] is legal" as membership in that set.

#include <set>
#include <string>
#include <vector>

#include "ajwt/idp/records.hpp"

namespace dagoracle {

inline void extend_paths(const ajwt::idp::WorkflowDefinition& wf,
                         std::vector<std::string>& current,
                         std::set<std::vector<std::string>>& all) {
  all.insert(current);
  for (const auto& [from, to] : wf.edges) {
    if (from == current.back()) {
      current.push_back(to);
      extend_paths(wf, current, all);
      current.pop_back();
    }
  }
}

// Every non-empty path beginning at a source node (acyclic ⇒ finite).
inline std::set<std::vector<std::string>> all_source_paths(
    const ajwt::idp::WorkflowDefinition& wf) {
  std::set<std::string> not_source;
  for (const auto& [from, to] : wf.edges) {
    (void)from;
    not_source.insert(to);
  }
  std::set<std::vector<std::string>> all;
  for (const auto& step : wf.steps) {
    if (not_source.contains(step.step_id)) continue;
    std::vector<std::string> current{step.step_id};
    extend_paths(wf, current, all);
  }
  return all;
}

inline bool oracle_is_legal(const std::set<std::vector<std::string>>& paths,
                            std::vector<std::string> executed, const std::string& next) {
  executed.push_back(next);
  return paths.contains(executed);
}

// All sequences over the step alphabet with length ≤ max_len (for exhaustive
// comparison against the production check).
inline std::vector<std::vector<std::string>> all_sequences(
    const std::vector<std::string>& alphabet, std::size_t max_len) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next_frontier;
    for (const auto& seq : frontier) {
      for (const std::string& step : alphabet) {
        std::vector<std::string> extended = seq;
        extended.push_back(step);
        out.push_back(extended);
        next_frontier.push_back(std::move(extended));
      }
    }
    frontier = std::move(next_frontier);
  }
  return out;
}

}  // namespace dagoracle
