#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gamelab/rational.hpp"

namespace gamelab {

// Points rules: a player's guaranteed points as a function of the requested
// number. "Costless" pays the top request in full and two points less for
// everything else, so requesting less than the maximum costs nothing further.
enum class PointsRule {
  kNMinus2,
  kNMinus1,
  kN,
  kNPlus1,
  kNPlus2,
  kCostlessMinus2,
};

// Bonus rules: condition under which the bonus is added to a player's payoff,
// evaluated from that player's perspective (own request, other's request).
enum class BonusRule {
  kGapLower = 1,    // own == other - gap (player with the lower number)
  kGapHigher,       // own == other + gap (player with the higher number)
  kGapAbsolute,     // |own - other| == gap
  kMoreThan,        // |own - other| > gap
  kEqual,           // own == other
  kUnequal,         // own != other
  kSumEven,         // own + other even
  kSumOdd,          // own + other odd
  kSumUpper,        // own + other == upper bound
  kLessUpper,       // own + other < upper bound
  kCoordinateLow,   // own == other == lower bound
};

constexpr int kNumPointsRules = 6;
constexpr int kNumBonusRules = 11;

const char* points_rule_id(PointsRule p);
const char* bonus_rule_id(BonusRule b);
// Display names used in regression tables.
const char* points_rule_label(PointsRule p);
const char* bonus_rule_label(BonusRule b);
std::optional<PointsRule> points_rule_from_id(const std::string& id);
std::optional<BonusRule> bonus_rule_from_id(const std::string& id);
bool bonus_rule_uses_gap(BonusRule b);

struct GameSpec {
  int lower = 1;   // inclusive lowest request
  int upper = 5;   // inclusive highest request
  int gap = 1;     // separation parameter, read only by gap rules
  int bonus = 1;   // bonus size in points
  PointsRule points = PointsRule::kN;
  BonusRule rule = BonusRule::kEqual;

  int num_actions() const { return upper - lower + 1; }
  bool operator==(const GameSpec&) const = default;
};

// Structural validity: the operations below work for any spec passing this
// (bounds ordered, at least two actions, nonnegative bonus, positive gap).
bool spec_is_structural(const GameSpec& s);
// Family membership: the enumerated parameter ranges. `offsets` is the set of
// allowed upper-lower differences.
bool spec_in_family(const GameSpec& s, const std::vector<int>& offsets);

// Guaranteed points for a request, before any bonus. May be negative.
int guaranteed_points(const GameSpec& s, int action);
// Whether the bonus accrues to the player requesting `own` against `other`.
bool bonus_applies(const GameSpec& s, int own, int other);
// Row player's payoff.
long long payoff(const GameSpec& s, int own, int other);

struct SymmetricGame {
  std::vector<int> actions;                   // ascending labels
  std::vector<std::vector<long long>> payoff; // row player's matrix

  int num_actions() const { return int(actions.size()); }
  long long at(int i, int j) const { return payoff[i][j]; }
};

SymmetricGame payoff_matrix(const GameSpec& s);

// Offset presets for the family. The default matches the raw combination
// count 1,689,600; the wide preset includes offset 20 as well.
std::vector<int> default_offsets();
std::vector<int> wide_offsets();

// Calls `fn` once per raw spec in lexicographic enumeration order
// (lower, upper, gap, bonus, points, rule). Returns the number of specs.
std::uint64_t enumerate_family(const std::vector<int>& offsets,
                               const std::function<void(const GameSpec&)>& fn);

struct FamilyIndex {
  std::vector<GameSpec> unique;   // first-in-enumeration-order representatives
  // Exact mass each representative absorbs under the weighted sampling scheme
  // (sums to 1 over the population).
  std::vector<Rational> weighted_mass;
  std::uint64_t raw_count = 0;
  std::string digest;             // content hash of the unique spec stream
};

// Deduplicates by exact payoff-matrix equality over equal action sets.
FamilyIndex dedup_family(const std::vector<int>& offsets);

enum class SampleScheme { kUniform, kWeighted };

struct GameSampleFrame {
  std::vector<GameSpec> games;
  std::vector<double> weights;   // sampling weight of each drawn game
  SampleScheme scheme = SampleScheme::kUniform;
  std::uint64_t seed = 0;
  std::string population_digest;
};

// Weighted sampling without replacement from the deduplicated population.
GameSampleFrame sample_games(const FamilyIndex& index, SampleScheme scheme,
                             std::size_t n, std::uint64_t seed);

// Canonical key used by dedup and tests: action labels plus the payoff
// matrix, byte-serialized.
std::string matrix_key(const SymmetricGame& g);

}  // namespace gamelab
