#include "gamelab/games.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstring>
#include <queue>
#include <stdexcept>

#include "gamelab/hash.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {

const char* points_rule_id(PointsRule p) {
  switch (p) {
    case PointsRule::kNMinus2: return "n_minus_2";
    case PointsRule::kNMinus1: return "n_minus_1";
    case PointsRule::kN: return "n";
    case PointsRule::kNPlus1: return "n_plus_1";
    case PointsRule::kNPlus2: return "n_plus_2";
    case PointsRule::kCostlessMinus2: return "costless_minus_2";
  }
  return "?";
}

const char* bonus_rule_id(BonusRule b) {
  switch (b) {
    case BonusRule::kGapLower: return "gap_lower";
    case BonusRule::kGapHigher: return "gap_higher";
    case BonusRule::kGapAbsolute: return "gap_absolute";
    case BonusRule::kMoreThan: return "more_than";
    case BonusRule::kEqual: return "equal";
    case BonusRule::kUnequal: return "unequal";
    case BonusRule::kSumEven: return "sum_even";
    case BonusRule::kSumOdd: return "sum_odd";
    case BonusRule::kSumUpper: return "sum_upper";
    case BonusRule::kLessUpper: return "less_upper";
    case BonusRule::kCoordinateLow: return "coordinate_low";
  }
  return "?";
}

const char* points_rule_label(PointsRule p) {
  switch (p) {
    case PointsRule::kNMinus2: return "Normal -2";
    case PointsRule::kNMinus1: return "Normal -1";
    case PointsRule::kN: return "Normal";
    case PointsRule::kNPlus1: return "Normal +1";
    case PointsRule::kNPlus2: return "Normal +2";
    case PointsRule::kCostlessMinus2: return "Two Less Max Costless";
  }
  return "?";
}

const char* bonus_rule_label(BonusRule b) {
  switch (b) {
    case BonusRule::kGapLower: return "Gap Lower";
    case BonusRule::kGapHigher: return "Gap Higher";
    case BonusRule::kGapAbsolute: return "Gap Absolute";
    case BonusRule::kMoreThan: return "More Than";
    case BonusRule::kEqual: return "Equal";
    case BonusRule::kUnequal: return "Unequal";
    case BonusRule::kSumEven: return "Sum Even";
    case BonusRule::kSumOdd: return "Sum Odd";
    case BonusRule::kSumUpper: return "Sum Upper";
    case BonusRule::kLessUpper: return "Less Upper";
    case BonusRule::kCoordinateLow: return "Coordinate Low";
  }
  return "?";
}

namespace {

constexpr std::array<PointsRule, kNumPointsRules> kPointsOrder = {
    PointsRule::kNMinus2, PointsRule::kNMinus1, PointsRule::kN,
    PointsRule::kNPlus1,  PointsRule::kNPlus2,  PointsRule::kCostlessMinus2};

constexpr std::array<BonusRule, kNumBonusRules> kBonusOrder = {
    BonusRule::kGapLower,  BonusRule::kGapHigher, BonusRule::kGapAbsolute,
    BonusRule::kMoreThan,  BonusRule::kEqual,     BonusRule::kUnequal,
    BonusRule::kSumEven,   BonusRule::kSumOdd,    BonusRule::kSumUpper,
    BonusRule::kLessUpper, BonusRule::kCoordinateLow};

constexpr int kLowerMin = 1, kLowerMax = 20;
constexpr int kGapMin = 1, kGapMax = 4;
constexpr int kBonusMin = 1, kBonusMax = 20;

}  // namespace

std::optional<PointsRule> points_rule_from_id(const std::string& id) {
  for (PointsRule p : kPointsOrder)
    if (id == points_rule_id(p)) return p;
  return std::nullopt;
}

std::optional<BonusRule> bonus_rule_from_id(const std::string& id) {
  for (BonusRule b : kBonusOrder)
    if (id == bonus_rule_id(b)) return b;
  return std::nullopt;
}

bool bonus_rule_uses_gap(BonusRule b) {
  switch (b) {
    case BonusRule::kGapLower:
    case BonusRule::kGapHigher:
    case BonusRule::kGapAbsolute:
    case BonusRule::kMoreThan:
      return true;
    default:
      return false;
  }
}

bool spec_is_structural(const GameSpec& s) {
  return s.lower < s.upper && s.gap >= 1 && s.bonus >= 0;
}

bool spec_in_family(const GameSpec& s, const std::vector<int>& offsets) {
  if (s.lower < kLowerMin || s.lower > kLowerMax) return false;
  int offset = s.upper - s.lower;
  if (std::find(offsets.begin(), offsets.end(), offset) == offsets.end())
    return false;
  if (s.gap < kGapMin || s.gap > kGapMax) return false;
  if (s.bonus < kBonusMin || s.bonus > kBonusMax) return false;
  return true;
}

int guaranteed_points(const GameSpec& s, int action) {
  switch (s.points) {
    case PointsRule::kNMinus2: return action - 2;
    case PointsRule::kNMinus1: return action - 1;
    case PointsRule::kN: return action;
    case PointsRule::kNPlus1: return action + 1;
    case PointsRule::kNPlus2: return action + 2;
    case PointsRule::kCostlessMinus2:
      return action == s.upper ? s.upper : s.upper - 2;
  }
  return 0;
}

bool bonus_applies(const GameSpec& s, int own, int other) {
  switch (s.rule) {
    case BonusRule::kGapLower: return own == other - s.gap;
    case BonusRule::kGapHigher: return own == other + s.gap;
    case BonusRule::kGapAbsolute: return std::abs(own - other) == s.gap;
    case BonusRule::kMoreThan: return std::abs(own - other) > s.gap;
    case BonusRule::kEqual: return own == other;
    case BonusRule::kUnequal: return own != other;
    case BonusRule::kSumEven: return (own + other) % 2 == 0;
    case BonusRule::kSumOdd: return (own + other) % 2 != 0;
    case BonusRule::kSumUpper: return own + other == s.upper;
    case BonusRule::kLessUpper: return own + other < s.upper;
    case BonusRule::kCoordinateLow: return own == s.lower && other == s.lower;
  }
  return false;
}

long long payoff(const GameSpec& s, int own, int other) {
  long long base = guaranteed_points(s, own);
  if (bonus_applies(s, own, other)) base += s.bonus;
  return base;
}

SymmetricGame payoff_matrix(const GameSpec& s) {
  if (!spec_is_structural(s)) throw std::invalid_argument("non-structural game spec");
  SymmetricGame g;
  int n = s.num_actions();
  g.actions.resize(n);
  for (int i = 0; i < n; ++i) g.actions[i] = s.lower + i;
  g.payoff.assign(n, std::vector<long long>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.payoff[i][j] = payoff(s, g.actions[i], g.actions[j]);
  return g;
}

std::vector<int> default_offsets() {
  std::vector<int> v;
  for (int o = 4; o <= 19; ++o) v.push_back(o);
  return v;
}

std::vector<int> wide_offsets() {
  std::vector<int> v;
  for (int o = 4; o <= 20; ++o) v.push_back(o);
  return v;
}

std::uint64_t enumerate_family(const std::vector<int>& offsets,
                               const std::function<void(const GameSpec&)>& fn) {
  std::uint64_t count = 0;
  for (int lower = kLowerMin; lower <= kLowerMax; ++lower) {
    for (int offset : offsets) {
      for (int gap = kGapMin; gap <= kGapMax; ++gap) {
        for (int bonus = kBonusMin; bonus <= kBonusMax; ++bonus) {
          for (PointsRule p : kPointsOrder) {
            for (BonusRule b : kBonusOrder) {
              GameSpec s;
              s.lower = lower;
              s.upper = lower + offset;
              s.gap = gap;
              s.bonus = bonus;
              s.points = p;
              s.rule = b;
              fn(s);
              ++count;
            }
          }
        }
      }
    }
  }
  return count;
}

std::string matrix_key(const SymmetricGame& g) {
  std::string key;
  key.reserve(8 + g.actions.size() * 4 + g.actions.size() * g.actions.size() * 8);
  auto put32 = [&key](std::int32_t v) {
    for (int i = 0; i < 4; ++i) key.push_back(char((v >> (8 * i)) & 0xff));
  };
  put32(std::int32_t(g.actions.size()));
  for (int a : g.actions) put32(a);
  for (const auto& row : g.payoff)
    for (long long v : row)
      for (int i = 0; i < 8; ++i) key.push_back(char((v >> (8 * i)) & 0xff));
  return key;
}

namespace {

// Exact per-parameter masses of the weighted sampling scheme. The gap-using
// bonus rules carry 1/100 each (so gap-rule draws total 4%); the seven
// gap-free rules split the remaining 24/25 evenly. Points rules: the costless
// variant carries 19/200, the five shift rules 181/1000 each (sums to one).
Rational bonus_rule_mass(BonusRule b) {
  if (bonus_rule_uses_gap(b)) return Rational(1, 100);
  return Rational(24, 175);
}

Rational points_rule_mass(PointsRule p) {
  if (p == PointsRule::kCostlessMinus2) return Rational(19, 200);
  return Rational(181, 1000);
}

struct BlockIndicators {
  // One entry per distinct indicator matrix appearing in this block.
  std::vector<std::vector<std::uint8_t>> classes;
  // (rule, gap) -> class id, and whether that class is all-zero.
  int class_of[kNumBonusRules][kGapMax + 1];
  std::vector<bool> class_zero;
};

BlockIndicators block_indicators(int lower, int upper) {
  BlockIndicators out;
  int n = upper - lower + 1;
  std::vector<std::uint8_t> mat(std::size_t(n) * n);
  for (int bi = 0; bi < kNumBonusRules; ++bi) {
    BonusRule rule = kBonusOrder[bi];
    int gap_count = bonus_rule_uses_gap(rule) ? kGapMax : 1;
    for (int gap = 1; gap <= gap_count; ++gap) {
      GameSpec s;
      s.lower = lower;
      s.upper = upper;
      s.gap = gap;
      s.rule = rule;
      bool all_zero = true;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          bool hit = bonus_applies(s, lower + i, lower + j);
          mat[std::size_t(i) * n + j] = hit ? 1 : 0;
          if (hit) all_zero = false;
        }
      }
      int cls = -1;
      for (std::size_t c = 0; c < out.classes.size(); ++c) {
        if (out.classes[c] == mat) {
          cls = int(c);
          break;
        }
      }
      if (cls < 0) {
        cls = int(out.classes.size());
        out.classes.push_back(mat);
        out.class_zero.push_back(all_zero);
      }
      out.class_of[bi][gap] = cls;
    }
    // Gap-free rules share one indicator across all gap values.
    if (!bonus_rule_uses_gap(rule))
      for (int gap = 2; gap <= kGapMax; ++gap)
        out.class_of[bi][gap] = out.class_of[bi][1];
  }
  return out;
}

}  // namespace

FamilyIndex dedup_family(const std::vector<int>& offsets) {
  FamilyIndex index;
  Rational total_mass = 0;
  std::vector<Rational> mass;
  Rational base_mass = Rational(1, 20) * Rational(1, int(offsets.size())) *
                       Rational(1, 20) * Rational(1, 4);

  Sha256 digest;
  for (int lower = kLowerMin; lower <= kLowerMax; ++lower) {
    for (int offset : offsets) {
      int upper = lower + offset;
      BlockIndicators ind = block_indicators(lower, upper);
      // Key space: class id x points rule x (0 for zero-class else bonus).
      std::vector<std::int32_t> first_rep(
          ind.classes.size() * kNumPointsRules * (kBonusMax + 1), -1);
      auto key_of = [&](int cls, int pi, int bonus_slot) {
        return (std::size_t(cls) * kNumPointsRules + pi) * (kBonusMax + 1) +
               bonus_slot;
      };
      for (int gap = kGapMin; gap <= kGapMax; ++gap) {
        for (int bonus = kBonusMin; bonus <= kBonusMax; ++bonus) {
          for (int pi = 0; pi < kNumPointsRules; ++pi) {
            for (int bi = 0; bi < kNumBonusRules; ++bi) {
              int cls = ind.class_of[bi][gap];
              int bonus_slot = ind.class_zero[cls] ? 0 : bonus;
              std::size_t key = key_of(cls, pi, bonus_slot);
              Rational m = base_mass * points_rule_mass(kPointsOrder[pi]) *
                           bonus_rule_mass(kBonusOrder[bi]);
              total_mass += m;
              if (first_rep[key] < 0) {
                GameSpec s;
                s.lower = lower;
                s.upper = upper;
                s.gap = gap;
                s.bonus = bonus;
                s.points = kPointsOrder[pi];
                s.rule = kBonusOrder[bi];
                first_rep[key] = std::int32_t(index.unique.size());
                index.unique.push_back(s);
                mass.push_back(m);
                std::int32_t packed[6] = {s.lower, s.upper, s.gap, s.bonus,
                                          pi, bi};
                digest.update(packed, sizeof(packed));
              } else {
                mass[std::size_t(first_rep[key])] += m;
              }
            }
          }
        }
      }
    }
  }
  index.raw_count = std::uint64_t(20) * offsets.size() * 4 * 20 *
                    kNumPointsRules * kNumBonusRules;
  index.weighted_mass = std::move(mass);
  index.digest = digest.hex_digest();
  if (total_mass != 1)
    throw std::logic_error("weighted sampling masses do not sum to one");
  return index;
}

GameSampleFrame sample_games(const FamilyIndex& index, SampleScheme scheme,
                             std::size_t n, std::uint64_t seed) {
  std::size_t pop = index.unique.size();
  if (n > pop) throw std::invalid_argument("sample larger than population");
  GameSampleFrame frame;
  frame.scheme = scheme;
  frame.seed = seed;
  frame.population_digest = index.digest;

  std::vector<double> weight(pop);
  if (scheme == SampleScheme::kUniform) {
    for (std::size_t i = 0; i < pop; ++i) weight[i] = 1.0 / double(pop);
  } else {
    for (std::size_t i = 0; i < pop; ++i)
      weight[i] = rational_to_double(index.weighted_mass[i]);
  }

  // Weighted sampling without replacement (Efraimidis-Spirakis): draw keys
  // log(u)/w and keep the n largest.
  Rng rng(derive_seed(seed, "games/sample"));
  using Entry = std::pair<double, std::size_t>;  // (key, population index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  for (std::size_t i = 0; i < pop; ++i) {
    double u;
    do {
      u = rng.uniform01();
    } while (u <= 0.0);
    double key = std::log(u) / weight[i];
    if (heap.size() < n) {
      heap.emplace(key, i);
    } else if (key > heap.top().first) {
      heap.pop();
      heap.emplace(key, i);
    }
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  while (!heap.empty()) {
    chosen.push_back(heap.top().second);
    heap.pop();
  }
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) {
    frame.games.push_back(index.unique[i]);
    frame.weights.push_back(weight[i]);
  }
  return frame;
}

}  // namespace gamelab
