#include "ajwt/shim/tracker.hpp"

#include <utility>

namespace ajwt::shim {

WorkflowTracker::WorkflowTracker(std::string workflow_id)
    : workflow_id_(std::move(workflow_id)) {}

void WorkflowTracker::track_step(const std::string& step_id, const std::string& agent_id) {
  steps_.push_back(step_id);
  if (chain_.empty() || chain_.back() != agent_id) chain_.push_back(agent_id);
}

std::vector<std::string> WorkflowTracker::prior_steps() const {
  if (steps_.empty()) return {};
  return {steps_.begin(), steps_.end() - 1};
}

}  // namespace ajwt::shim
