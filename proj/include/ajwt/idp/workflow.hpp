#pragma once

// Workflow DAG semantics: structural validation, step-sequence legality, and
// delegation-chain consistency. Legality is defined as: executed_steps traces
// a path in the DAG starting at a source node, and the requested step is a
// direct successor of its last element (empty executed_steps ⇒ the requested
// step must itself be a source node).

#include <set>
#include <string>
#include <vector>

#include "ajwt/idp/records.hpp"
#include "ajwt/result.hpp"

namespace ajwt::idp {

struct ValidatedWorkflow {
  int step_count = 0;
};

// Structural checks: non-empty steps, unique step ids, edge endpoints defined,
// acyclic, allowed_agents non-empty and drawn from known_agents.
Result<ValidatedWorkflow> validate_workflow(const WorkflowDefinition& definition,
                                            const std::set<std::string>& known_agents);

std::set<std::string> source_steps(const WorkflowDefinition& definition);
std::set<std::string> successors_of(const WorkflowDefinition& definition,
                                    const std::string& step_id);

bool is_legal_step_sequence(const WorkflowDefinition& definition,
                            const std::vector<std::string>& executed_steps,
                            const std::string& next_step);

// Consecutive delegation pairs (a, b) must fit some DAG edge (s, t) with
// a ∈ allowed_agents(s) and b ∈ allowed_agents(t); single-element chains must
// name an agent allowed on some source step.
bool is_chain_consistent(const WorkflowDefinition& definition,
                         const std::vector<std::string>& delegation_chain);

}  // namespace ajwt::idp
