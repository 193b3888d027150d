#include "ajwt/idp/workflow.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace ajwt::idp {

const StepDef* WorkflowDefinition::find_step(const std::string& step_id) const {
  for (const StepDef& step : steps)
    if (step.step_id == step_id) return &step;
  return nullptr;
}

Result<ValidatedWorkflow> validate_workflow(const WorkflowDefinition& definition,
                                            const std::set<std::string>& known_agents) {
  using R = Result<ValidatedWorkflow>;
  if (definition.workflow_id.empty()) return R::failure("invalid_workflow", "missing id");
  if (definition.steps.empty()) return R::failure("invalid_workflow", "no steps");

  std::set<std::string> ids;
  for (const StepDef& step : definition.steps) {
    if (step.step_id.empty() || !ids.insert(step.step_id).second)
      return R::failure("invalid_workflow", "duplicate or empty step id");
    if (step.allowed_agents.empty())
      return R::failure("invalid_workflow", "step without allowed agents: " + step.step_id);
    for (const std::string& agent : step.allowed_agents)
      if (!known_agents.contains(agent))
        return R::failure("unknown_agent_in_workflow", agent + " @ " + step.step_id);
  }

  std::map<std::string, int> indegree;
  for (const std::string& id : ids) indegree[id] = 0;
  for (const auto& [from, to] : definition.edges) {
    if (!ids.contains(from) || !ids.contains(to))
      return R::failure("invalid_workflow", "edge endpoint not a step: " + from + "->" + to);
    ++indegree[to];
  }

  // Kahn's algorithm; leftover nodes mean a cycle.
  std::deque<std::string> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push_back(id);
  std::size_t visited = 0;
  std::map<std::string, int> remaining = indegree;
  while (!ready.empty()) {
    std::string current = ready.front();
    ready.pop_front();
    ++visited;
    for (const auto& [from, to] : definition.edges)
      if (from == current && --remaining[to] == 0) ready.push_back(to);
  }
  if (visited != ids.size()) return R::failure("workflow_cycle", "edges contain a cycle");

  return R::success(ValidatedWorkflow{static_cast<int>(definition.steps.size())});
}

std::set<std::string> source_steps(const WorkflowDefinition& definition) {
  std::set<std::string> sources;
  for (const StepDef& step : definition.steps) sources.insert(step.step_id);
  for (const auto& [from, to] : definition.edges) {
    (void)from;
    sources.erase(to);
  }
  return sources;
}

std::set<std::string> successors_of(const WorkflowDefinition& definition,
                                    const std::string& step_id) {
  std::set<std::string> out;
  for (const auto& [from, to] : definition.edges)
    if (from == step_id) out.insert(to);
  return out;
}

bool is_legal_step_sequence(const WorkflowDefinition& definition,
                            const std::vector<std::string>& executed_steps,
                            const std::string& next_step) {
  if (definition.find_step(next_step) == nullptr) return false;
  for (const std::string& step : executed_steps)
    if (definition.find_step(step) == nullptr) return false;

  if (executed_steps.empty()) return source_steps(definition).contains(next_step);

  if (!source_steps(definition).contains(executed_steps.front())) return false;
  for (std::size_t i = 0; i + 1 < executed_steps.size(); ++i)
    if (!successors_of(definition, executed_steps[i]).contains(executed_steps[i + 1]))
      return false;
  return successors_of(definition, executed_steps.back()).contains(next_step);
}

bool is_chain_consistent(const WorkflowDefinition& definition,
                         const std::vector<std::string>& delegation_chain) {
  if (delegation_chain.empty()) return false;

  auto allowed_on_some_source = [&](const std::string& agent) {
    for (const std::string& source : source_steps(definition)) {
      const StepDef* step = definition.find_step(source);
      if (step != nullptr && step->allowed_agents.contains(agent)) return true;
    }
    return false;
  };
  if (delegation_chain.size() == 1) return allowed_on_some_source(delegation_chain.front());

  for (std::size_t i = 0; i + 1 < delegation_chain.size(); ++i) {
    const std::string& handing_over = delegation_chain[i];
    const std::string& taking_over = delegation_chain[i + 1];
    bool fits_some_edge = false;
    for (const auto& [from, to] : definition.edges) {
      const StepDef* from_step = definition.find_step(from);
      const StepDef* to_step = definition.find_step(to);
      if (from_step != nullptr && to_step != nullptr &&
          from_step->allowed_agents.contains(handing_over) &&
          to_step->allowed_agents.contains(taking_over)) {
        fits_some_edge = true;
        break;
      }
    }
    if (!fits_some_edge) return false;
  }
  return true;
}

}  // namespace ajwt::idp
