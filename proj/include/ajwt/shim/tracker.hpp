#pragma once

// Workflow tracking: the shim's record of which steps ran, in what order, and
// which agent executed each. Token requests are built from this state alone —
// callers never hand the shim ready-made claims.

#include <map>
#include <string>
#include <vector>

namespace ajwt::shim {

class WorkflowTracker {
 public:
  explicit WorkflowTracker(std::string workflow_id);

  // Records that `agent_id` is now executing `step_id`. The step list is
  // append-only; the agent joins the delegation chain only when control
  // actually changed hands (it differs from the chain tail).
  void track_step(const std::string& step_id, const std::string& agent_id);

  const std::string& workflow_id() const { return workflow_id_; }

  // Every tracked step, oldest first; the last entry is the in-flight step.
  const std::vector<std::string>& executed_steps() const { return steps_; }
  // Steps completed before the in-flight one — what a token request reports
  // as its execution history.
  std::vector<std::string> prior_steps() const;

  std::string current_step() const { return steps_.empty() ? std::string() : steps_.back(); }
  std::string current_agent() const { return chain_.empty() ? std::string() : chain_.back(); }

  const std::vector<std::string>& delegation_chain() const { return chain_; }

  // Free-form context (repository, branch, …) copied into token requests.
  std::map<std::string, std::string>& execution_context() { return context_; }
  const std::map<std::string, std::string>& execution_context() const { return context_; }

 private:
  std::string workflow_id_;
  std::vector<std::string> steps_;
  std::vector<std::string> chain_;
  std::map<std::string, std::string> context_;
};

}  // namespace ajwt::shim
