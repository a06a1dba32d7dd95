#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gamelab/games.hpp"

namespace gamelab {

class ChatBackend;

// One elicitation context: rendered instructions plus the ordered action set.
struct Setting {
  std::string id;  // content hash of text + actions
  std::string instruction_text;
  std::vector<int> actions;
  std::optional<GameSpec> game;
};

Setting make_setting(const std::string& instruction_text,
                     const std::vector<int>& actions);
Setting setting_for_game(const GameSpec& spec);
Setting setting_for_matrix(const std::string& name, const SymmetricGame& game);

// Persona text assembled from a shared preamble, a persona body with optional
// {trait} slots, and an optional shared explanation suffix.
struct PromptSpec {
  std::string preamble;
  std::string persona;
  std::string explanation;
  std::map<std::string, int> traits;

  std::string text() const;  // substituted; throws on an unresolved slot
  std::string digest() const;
};

struct ResponseDistribution {
  std::string setting_id;
  std::vector<double> counts;  // fractional for mixtures
  double total = 0;
  std::vector<double> probs;   // counts / total
};

ResponseDistribution distribution_from_counts(const std::string& setting_id,
                                              const std::vector<double>& counts);

enum class Level0Rule { kMaxGuaranteed, kUniform };

enum class AgentKind {
  kBackendPersona,
  kMixture,
  kMechanicalLevelK,
  kUniform,
  kRandomPure,
  kTabulated,
};

struct AgentModel {
  AgentKind kind = AgentKind::kUniform;
  std::string name;

  // kBackendPersona
  PromptSpec prompt;
  double temperature = 1.0;

  // kMixture
  std::vector<AgentModel> components;
  std::vector<double> weights;

  // kMechanicalLevelK
  int level = 0;
  Level0Rule level0 = Level0Rule::kMaxGuaranteed;

  // kTabulated: distributions keyed by setting id
  std::map<std::string, ResponseDistribution> table;
};

// Extracts the final in-range whole number from free-form text.
std::optional<int> parse_response(const std::string& raw,
                                  const std::vector<int>& actions);

// Draws n responses from the model. Backend personas use the two-step
// chain-of-thought protocol and may return fewer than n responses (invalid
// replies are discarded without resampling). Deterministic models are
// bit-reproducible for a fixed seed.
ResponseDistribution elicit_distribution(const AgentModel& model,
                                         const Setting& setting, int n,
                                         std::uint64_t seed,
                                         ChatBackend* backend = nullptr);

ResponseDistribution mixture_distribution(
    const std::vector<ResponseDistribution>& components,
    const std::vector<double>& weights);

ResponseDistribution mechanical_levelk(const SymmetricGame& game, int k,
                                       Level0Rule level0_rule);

// Largest-remainder apportionment of n agents across mixture weights.
std::vector<int> scale_mixture_to_population(const std::vector<double>& weights,
                                             int n);

}  // namespace gamelab
