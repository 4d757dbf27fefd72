#pragma once
// JSON wire format for problems.
//
// Full MDP: {"num_states":S,"num_actions":A,"gamma":g,"rewards":[[..]],
//            "transitions":[[[..]]]} with transitions indexed [s][a][s'].
// Bandit shorthand: {"rewards":[r0,..]} means S=1, gamma=0, self-loop.
// Parse errors name the offending field.

#include <variant>

#include "json.hpp"
#include "pgrates/mdp_core.hpp"

namespace pgrates {

using nlohmann::json;

TabularMdp mdp_from_json(const json& j);
json mdp_to_json(const TabularMdp& mdp);

// Either form; flat "rewards" stays a bandit reward vector.
std::variant<VectorXd, TabularMdp> problem_from_json(const json& j);
json problem_to_json(const std::variant<VectorXd, TabularMdp>& problem);

}  // namespace pgrates
