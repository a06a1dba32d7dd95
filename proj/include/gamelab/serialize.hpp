#pragma once

#include <string>

#include "json.hpp"

#include "gamelab/agents.hpp"
#include "gamelab/equilibria.hpp"
#include "gamelab/games.hpp"
#include "gamelab/optimize.hpp"
#include "gamelab/render.hpp"

namespace gamelab {

using Json = nlohmann::ordered_json;

Json game_to_json(const GameSpec& s);
GameSpec game_from_json(const Json& j);
Json matrix_to_json(const SymmetricGame& g);

Json template_to_json(const InstructionTemplate& t);
InstructionTemplate template_from_json(const Json& j);

// Probabilities serialize as exact "p/q" strings.
Json strategy_to_json(const MixedStrategy& s);
MixedStrategy strategy_from_json(const Json& j);
Json equilibrium_to_json(const EquilibriumProfile& e);
EquilibriumProfile equilibrium_from_json(const Json& j);
Json nash_to_json(const NashResult& r);
Json selection_to_json(const SelectionOutcome& o);

Json distribution_to_json(const ResponseDistribution& d);
ResponseDistribution distribution_from_json(const Json& j);
Json mixture_fit_to_json(const MixtureFit& f);
Json param_fit_to_json(const ParamFit& f);

Json setting_to_json(const Setting& s);
Setting setting_from_json(const Json& j);
Json agent_to_json(const AgentModel& m);
AgentModel agent_from_json(const Json& j);

Json frame_to_json(const GameSampleFrame& f);
GameSampleFrame frame_from_json(const Json& j);

// Population files are line-delimited: a header object, then one
// {"spec": ..., "mass": "p/q"} object per unique game.
void write_population(const std::string& path, const FamilyIndex& index);
FamilyIndex read_population(const std::string& path);

// Stable byte form used everywhere a file is hashed or compared.
std::string canonical_dump(const Json& j);
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace gamelab
