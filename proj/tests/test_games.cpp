#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "gamelab/games.hpp"
#include "gamelab/render.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;

namespace {

GameSpec ar_basic() {
  return {11, 20, 1, 20, PointsRule::kN, BonusRule::kGapLower};
}

// Worked example: 5..14, points n-2, bonus 10 on |own-other|=6.
GameSpec worked_example() {
  return {5, 14, 6, 10, PointsRule::kNMinus2, BonusRule::kGapAbsolute};
}

// Deduplication costs a few seconds; most cases can share one index.
const FamilyIndex& shared_index() {
  static const FamilyIndex index = dedup_family(default_offsets());
  return index;
}

}  // namespace

TEST_CASE("guaranteed points per rule") {
  GameSpec s{1, 20, 1, 5, PointsRule::kN, BonusRule::kEqual};
  CHECK(guaranteed_points(s, 7) == 7);

  s.points = PointsRule::kNMinus2;
  CHECK(guaranteed_points(s, 1) == -1);
  CHECK(guaranteed_points(s, 7) == 5);

  s.points = PointsRule::kNPlus2;
  CHECK(guaranteed_points(s, 7) == 9);

  s.upper = 14;
  s.points = PointsRule::kCostlessMinus2;
  CHECK(guaranteed_points(s, 14) == 14);
  CHECK(guaranteed_points(s, 9) == 12);
  CHECK(guaranteed_points(s, 1) == 12);
}

TEST_CASE("payoffs in the 11-20 game") {
  GameSpec s = ar_basic();
  CHECK(payoff(s, 19, 20) == 39);  // undercuts by one: 19 + 20
  CHECK(payoff(s, 20, 19) == 20);
  CHECK(payoff(s, 20, 20) == 20);
  CHECK(payoff(s, 11, 11) == 11);
  CHECK(payoff(s, 11, 12) == 31);
  CHECK(payoff(s, 11, 13) == 11);
}

TEST_CASE("worked example payoffs") {
  GameSpec s = worked_example();
  CHECK(payoff(s, 5, 11) == 13);   // 5 - 2 + 10
  CHECK(payoff(s, 11, 5) == 19);   // 11 - 2 + 10, absolute rule pays both
  CHECK(payoff(s, 5, 10) == 3);
  CHECK(payoff(s, 14, 8) == 22);
}

TEST_CASE("coordinate-low bonus fires only at the bottom") {
  GameSpec s{3, 8, 2, 7, PointsRule::kN, BonusRule::kCoordinateLow};
  for (int a = 3; a <= 8; ++a)
    for (int b = 3; b <= 8; ++b) {
      bool expect = a == 3 && b == 3;
      CHECK(bonus_applies(s, a, b) == expect);
    }
}

TEST_CASE("complementary bonus rule pairs") {
  GameSpec even{1, 9, 1, 5, PointsRule::kN, BonusRule::kSumEven};
  GameSpec odd = even;
  odd.rule = BonusRule::kSumOdd;
  GameSpec equal = even;
  equal.rule = BonusRule::kEqual;
  GameSpec unequal = even;
  unequal.rule = BonusRule::kUnequal;
  for (int a = 1; a <= 9; ++a)
    for (int b = 1; b <= 9; ++b) {
      CHECK(bonus_applies(even, a, b) != bonus_applies(odd, a, b));
      CHECK(bonus_applies(equal, a, b) != bonus_applies(unequal, a, b));
    }
}

TEST_CASE("gap-free rules ignore the separation parameter") {
  for (BonusRule rule :
       {BonusRule::kEqual, BonusRule::kUnequal, BonusRule::kSumEven,
        BonusRule::kSumOdd, BonusRule::kSumUpper, BonusRule::kLessUpper,
        BonusRule::kCoordinateLow}) {
    CHECK(!bonus_rule_uses_gap(rule));
    GameSpec s{2, 12, 1, 9, PointsRule::kNPlus1, rule};
    SymmetricGame base = payoff_matrix(s);
    for (int gap = 2; gap <= 4; ++gap) {
      s.gap = gap;
      CHECK(matrix_key(payoff_matrix(s)) == matrix_key(base));
    }
  }
  for (BonusRule rule : {BonusRule::kGapLower, BonusRule::kGapHigher,
                         BonusRule::kGapAbsolute, BonusRule::kMoreThan})
    CHECK(bonus_rule_uses_gap(rule));
}

TEST_CASE("payoff matrix matches the scalar payoff function") {
  GameSpec s = worked_example();
  SymmetricGame g = payoff_matrix(s);
  REQUIRE(g.num_actions() == 10);
  CHECK(g.actions.front() == 5);
  CHECK(g.actions.back() == 14);
  for (int i = 0; i < g.num_actions(); ++i)
    for (int j = 0; j < g.num_actions(); ++j)
      CHECK(g.at(i, j) == payoff(s, g.actions[i], g.actions[j]));
}

TEST_CASE("offset presets") {
  std::vector<int> def = default_offsets();
  REQUIRE(def.size() == 16);
  CHECK(def.front() == 4);
  CHECK(def.back() == 19);
  std::vector<int> wide = wide_offsets();
  REQUIRE(wide.size() == 17);
  CHECK(wide.back() == 20);
}

TEST_CASE("family membership bounds") {
  std::vector<int> offsets = default_offsets();
  CHECK(spec_in_family(ar_basic(), offsets));
  CHECK(!spec_in_family(worked_example(), offsets));  // gap 6 out of range

  GameSpec s = ar_basic();
  s.gap = 4;
  CHECK(spec_in_family(s, offsets));
  s.gap = 5;
  CHECK(!spec_in_family(s, offsets));
  s = ar_basic();
  s.bonus = 21;
  CHECK(!spec_in_family(s, offsets));
  s = ar_basic();
  s.lower = 0;
  s.upper = 9;
  CHECK(!spec_in_family(s, offsets));
  s = ar_basic();
  s.upper = 31;  // offset 20 needs the wide preset
  CHECK(!spec_in_family(s, offsets));
  CHECK(spec_in_family(s, wide_offsets()));
}

TEST_CASE("raw enumeration count") {
  std::uint64_t count = enumerate_family(default_offsets(),
                                         [](const GameSpec&) {});
  CHECK(count == 1689600ull);  // 20 * 16 * 4 * 20 * 6 * 11
}

TEST_CASE("enumeration order is lexicographic") {
  std::vector<GameSpec> first;
  enumerate_family(default_offsets(), [&](const GameSpec& s) {
    if (first.size() < 2) first.push_back(s);
  });
  REQUIRE(first.size() == 2);
  CHECK(first[0].lower == 1);
  CHECK(first[0].upper == 5);
  CHECK(first[0].gap == 1);
  CHECK(first[0].bonus == 1);
  CHECK(first[0].points == PointsRule::kNMinus2);
  CHECK(first[0].rule == BonusRule::kGapLower);
  CHECK(first[1].rule == BonusRule::kGapHigher);
}

// Brute-force cross-check of the deduplication on one (lower, upper) block:
// the distinct matrix keys over all raw specs in the block must agree with
// the index's representatives for that block, one-to-one.
TEST_CASE("dedup agrees with brute force on a block") {
  const FamilyIndex& index = shared_index();
  CHECK(index.raw_count == 1689600ull);
  CHECK(index.unique.size() == 840930u);

  const int lower = 3, upper = 9;
  std::set<std::string> raw_keys;
  enumerate_family(default_offsets(), [&](const GameSpec& s) {
    if (s.lower == lower && s.upper == upper)
      raw_keys.insert(matrix_key(payoff_matrix(s)));
  });
  std::set<std::string> unique_keys;
  for (const GameSpec& s : index.unique) {
    if (s.lower != lower || s.upper != upper) continue;
    std::string key = matrix_key(payoff_matrix(s));
    CHECK(unique_keys.insert(key).second);  // representatives never collide
  }
  CHECK(unique_keys == raw_keys);
}

TEST_CASE("dedup is deterministic and mass-conserving") {
  FamilyIndex fresh = dedup_family(default_offsets());
  CHECK(fresh.digest == shared_index().digest);
  CHECK(fresh.unique.size() == shared_index().unique.size());

  Rational total = 0;
  for (const Rational& m : fresh.weighted_mass) {
    CHECK(m > 0);
    total += m;
  }
  CHECK(total == Rational(1));
}

TEST_CASE("sampling is seed-deterministic") {
  const FamilyIndex& index = shared_index();
  GameSampleFrame a = sample_games(index, SampleScheme::kWeighted, 50, 7);
  GameSampleFrame b = sample_games(index, SampleScheme::kWeighted, 50, 7);
  REQUIRE(a.games.size() == 50);
  CHECK(a.games == b.games);
  CHECK(a.weights == b.weights);
  CHECK(a.population_digest == index.digest);

  GameSampleFrame c = sample_games(index, SampleScheme::kWeighted, 50, 8);
  CHECK(a.games != c.games);

  std::set<std::string> seen;  // without replacement
  for (const GameSpec& s : a.games)
    CHECK(seen.insert(matrix_key(payoff_matrix(s))).second);
}

TEST_CASE("weighted scheme puts about four percent on gap rules") {
  GameSampleFrame frame =
      sample_games(shared_index(), SampleScheme::kWeighted, 5000, 11);
  int gap_rule = 0;
  for (const GameSpec& s : frame.games)
    if (bonus_rule_uses_gap(s.rule)) ++gap_rule;
  double share = double(gap_rule) / double(frame.games.size());
  CHECK(share > 0.025);
  CHECK(share < 0.06);
}

TEST_CASE("rendered instructions for the 11-20 game") {
  std::string text = render_instructions(ar_basic());
  CHECK(text ==
        "You are going to play a game where you must select a whole number "
        "between 11 and 20. A player will receive a number of points "
        "equivalent to that number. After you tell us your number, we will "
        "randomly pair you with another worker who is also playing this same "
        "game. They will also have chosen a number between 11 and 20. If "
        "either player selects a number exactly 1 less than the other "
        "player's number, the player with the lower number will receive an "
        "additional 20 points. What number would you request?");
}

TEST_CASE("rendered instructions substitute every slot") {
  std::string text = render_instructions(worked_example());
  CHECK(text.find("between 5 and 14") != std::string::npos);
  CHECK(text.find("that number minus two") != std::string::npos);
  CHECK(text.find("an additional 10 points") != std::string::npos);
  CHECK(text.find("differ from each other by exactly 6") != std::string::npos);
  CHECK(text.find('{') == std::string::npos);

  GameSpec costless{5, 14, 1, 3, PointsRule::kCostlessMinus2,
                    BonusRule::kSumUpper};
  text = render_instructions(costless);
  CHECK(text.find("receive 14 points for selecting the number 14") !=
        std::string::npos);
  CHECK(text.find("12 points for selecting any other number") !=
        std::string::npos);
  CHECK(text.find("is exactly 14") != std::string::npos);
}

TEST_CASE("rendering rejects non-structural specs") {
  GameSpec s = ar_basic();
  s.upper = s.lower;  // single action
  CHECK_THROWS(render_instructions(s));
  CHECK_THROWS(payoff_matrix(s));
}
