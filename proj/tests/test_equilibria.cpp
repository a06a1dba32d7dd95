#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "gamelab/equilibria.hpp"
#include "gamelab/games.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;

namespace {

SymmetricGame make_game(std::vector<std::vector<long long>> payoff) {
  SymmetricGame g;
  g.payoff = std::move(payoff);
  g.actions.resize(g.payoff.size());
  for (std::size_t i = 0; i < g.actions.size(); ++i) g.actions[i] = int(i + 1);
  return g;
}

Rational prob(const MixedStrategy& s, int i) { return s.probs[i]; }

// Independent closed-form enumeration for symmetric 2x2 games, written
// directly from the best-response conditions. Returns (row p on action 0,
// col p on action 0) pairs; interior mixed points only when both players
// are genuinely indifferent.
std::vector<std::pair<Rational, Rational>> nash_2x2(const SymmetricGame& g) {
  Rational a = g.at(0, 0), b = g.at(0, 1), c = g.at(1, 0), d = g.at(1, 1);
  std::vector<std::pair<Rational, Rational>> out;
  auto best_versus = [&](const Rational& q) {
    // Row payoff difference action0 - action1 against col playing q on 0.
    return q * (a - c) + (1 - q) * (b - d);
  };
  for (Rational p : {Rational(0), Rational(1)})
    for (Rational q : {Rational(0), Rational(1)}) {
      Rational row_gain = best_versus(q);
      Rational col_gain = best_versus(p);
      bool row_ok = p == 1 ? row_gain >= 0 : row_gain <= 0;
      bool col_ok = q == 1 ? col_gain >= 0 : col_gain <= 0;
      if (row_ok && col_ok) out.emplace_back(p, q);
    }
  Rational denom = (a - c) + (d - b);
  if (denom != 0) {
    Rational q = (d - b) / denom;  // makes the opponent indifferent
    if (q > 0 && q < 1) out.emplace_back(q, q);
  }
  return out;
}

bool matches(const EquilibriumProfile& e,
             const std::pair<Rational, Rational>& oracle) {
  return prob(e.row, 0) == oracle.first && prob(e.col, 0) == oracle.second;
}

SymmetricGame ar_basic_matrix() {
  return payoff_matrix({11, 20, 1, 20, PointsRule::kN, BonusRule::kGapLower});
}

}  // namespace

TEST_CASE("coordination game has two pure and one mixed equilibrium") {
  SymmetricGame g = make_game({{2, 0}, {1, 1}});
  NashResult r = enumerate_nash(g);
  REQUIRE(r.resolved);
  REQUIRE(r.equilibria.size() == 3);
  for (const auto& e : r.equilibria) CHECK(is_nash_equilibrium(g, e.row, e.col));

  int mixed = 0;
  for (const auto& e : r.equilibria)
    if (prob(e.row, 0) != 0 && prob(e.row, 0) != 1) {
      ++mixed;
      CHECK(prob(e.row, 0) == Rational(1, 2));
      CHECK(prob(e.col, 0) == Rational(1, 2));
      CHECK(e.row_payoff == Rational(1));
    }
  CHECK(mixed == 1);
}

TEST_CASE("solver agrees with the 2x2 closed form on random games") {
  Rng rng(404);
  for (int trial = 0; trial < 300; ++trial) {
    SymmetricGame g = make_game({{0, 0}, {0, 0}});
    for (auto& row : g.payoff)
      for (auto& cell : row) cell = (long long)(rng.uniform_int(13)) - 6;
    auto oracle = nash_2x2(g);
    NashResult r = enumerate_nash(g);
    REQUIRE(r.resolved);
    for (const auto& e : r.equilibria)
      CHECK(is_nash_equilibrium(g, e.row, e.col));
    if (r.degenerate) continue;  // ties admit continua; counts may differ
    REQUIRE(r.equilibria.size() == oracle.size());
    for (const auto& point : oracle) {
      bool found = false;
      for (const auto& e : r.equilibria) found = found || matches(e, point);
      CHECK(found);
    }
  }
}

TEST_CASE("strictly dominated actions never carry mass") {
  // Action 3 is strictly dominated by action 1 everywhere.
  SymmetricGame g = make_game({{4, 1, 5}, {3, 2, 4}, {3, 0, 4}});
  NashResult r = enumerate_nash(g);
  REQUIRE(r.resolved);
  REQUIRE(!r.equilibria.empty());
  for (const auto& e : r.equilibria) {
    CHECK(prob(e.row, 2) == 0);
    CHECK(prob(e.col, 2) == 0);
    CHECK(is_nash_equilibrium(g, e.row, e.col));
  }
}

TEST_CASE("all-ties game is flagged degenerate") {
  SymmetricGame g = make_game({{1, 1}, {1, 1}});
  NashResult r = enumerate_nash(g);
  CHECK(r.degenerate);
  for (const auto& e : r.equilibria) CHECK(is_nash_equilibrium(g, e.row, e.col));
}

TEST_CASE("equilibria are invariant to positive affine payoff maps") {
  SymmetricGame g = make_game({{6, 0, 2}, {5, 4, 1}, {2, 2, 3}});
  SymmetricGame h = g;
  for (auto& row : h.payoff)
    for (auto& cell : row) cell = 3 * cell + 7;
  NashResult rg = enumerate_nash(g);
  NashResult rh = enumerate_nash(h);
  REQUIRE(rg.resolved);
  REQUIRE(rh.resolved);
  REQUIRE(rg.equilibria.size() == rh.equilibria.size());
  for (std::size_t i = 0; i < rg.equilibria.size(); ++i) {
    CHECK(rg.equilibria[i].row == rh.equilibria[i].row);
    CHECK(rg.equilibria[i].col == rh.equilibria[i].col);
  }
}

TEST_CASE("11-20 basic game has the unique published mixed equilibrium") {
  SymmetricGame g = ar_basic_matrix();
  NashResult r = enumerate_nash(g);
  REQUIRE(r.resolved);
  // Besides the symmetric mix the game carries shifted-support asymmetric
  // equilibria (odd vs even requests); all must verify, and exactly one
  // profile is symmetric.
  CHECK(r.equilibria.size() == 7);
  const EquilibriumProfile* sym = nullptr;
  for (const auto& e : r.equilibria) {
    CHECK(is_nash_equilibrium(g, e.row, e.col));
    if (e.symmetric()) {
      REQUIRE(sym == nullptr);
      sym = &e;
    }
  }
  REQUIRE(sym != nullptr);
  std::vector<Rational> expected = {
      0, 0, 0, 0, Rational(1, 4), Rational(1, 4),
      Rational(1, 5), Rational(3, 20), Rational(1, 10), Rational(1, 20)};
  CHECK(sym->row.probs == expected);
  // Every support action earns exactly 20 against the equilibrium mix.
  CHECK(sym->row_payoff == Rational(20));
}

TEST_CASE("cycle variant keeps the basic equilibrium") {
  SymmetricGame g = ar_basic_matrix();
  g.payoff[9][0] += 20;  // 20 vs 11 also pays the bonus
  NashResult r = enumerate_nash(g);
  REQUIRE(r.resolved);
  CHECK(r.equilibria.size() == 7);
  const EquilibriumProfile* sym = nullptr;
  for (const auto& e : r.equilibria)
    if (e.symmetric()) {
      REQUIRE(sym == nullptr);
      sym = &e;
    }
  REQUIRE(sym != nullptr);
  std::vector<Rational> expected = {
      0, 0, 0, 0, Rational(1, 4), Rational(1, 4),
      Rational(1, 5), Rational(3, 20), Rational(1, 10), Rational(1, 20)};
  CHECK(sym->row.probs == expected);
}

TEST_CASE("costless variant equilibrium") {
  SymmetricGame g;
  g.actions = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  g.payoff.assign(10, std::vector<long long>(10, 0));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      long long v = g.actions[i] == 20 ? 20 : 17;
      if (g.actions[i] == g.actions[j] - 1) v += 20;
      g.payoff[i][j] = v;
    }
  NashResult r = enumerate_nash(g);
  REQUIRE(r.resolved);
  CHECK(r.equilibria.size() == 9);
  const EquilibriumProfile* sym = nullptr;
  for (const auto& e : r.equilibria)
    if (e.symmetric()) {
      REQUIRE(sym == nullptr);
      sym = &e;
    }
  REQUIRE(sym != nullptr);
  std::vector<Rational> expected = {0, 0, 0,
                                    Rational(1, 10), Rational(3, 20),
                                    Rational(3, 20), Rational(3, 20),
                                    Rational(3, 20), Rational(3, 20),
                                    Rational(3, 20)};
  CHECK(sym->row.probs == expected);
}

TEST_CASE("risk dominance index") {
  SymmetricGame g = make_game({{2, 0}, {1, 1}});
  MixedStrategy uniform{{Rational(1, 2), Rational(1, 2)}};
  CHECK(risk_dominance_index(g, uniform) == Rational(1, 2));

  MixedStrategy pure0{{Rational(1), Rational(0)}};
  MixedStrategy pure1{{Rational(0), Rational(1)}};
  CHECK(risk_dominance_index(g, pure0) == 0);
  CHECK(risk_dominance_index(g, pure1) == 0);

  SymmetricGame scaled = g;
  for (auto& row : scaled.payoff)
    for (auto& cell : row) cell *= 3;
  CHECK(risk_dominance_index(scaled, uniform) == Rational(9, 2));
}

TEST_CASE("components group equilibria sharing a side") {
  SymmetricGame g = make_game({{1, 1, 0}, {1, 1, 0}, {0, 0, 2}});
  NashResult r = enumerate_nash(g);
  auto components = equilibrium_components(r.equilibria);
  // Actions 1 and 2 are interchangeable: everything built from them chains
  // into one component; (3,3) stands alone.
  bool found_singleton = false;
  for (const auto& comp : components)
    if (comp.members.size() == 1) {
      const auto& e = r.equilibria[comp.members[0]];
      if (prob(e.row, 2) == 1) found_singleton = true;
    }
  CHECK(found_singleton);
  for (const auto& comp : components) {
    REQUIRE(!comp.members.empty());
    CHECK(std::is_sorted(comp.members.begin(), comp.members.end()));
    if (comp.has_symmetric) CHECK(comp.first_symmetric >= 0);
  }
}

TEST_CASE("stag hunt selects the payoff-dominant equilibrium") {
  SymmetricGame g = make_game({{4, 0}, {3, 3}});
  SelectionOutcome o = hs_select(g);
  REQUIRE(o.resolved);
  CHECK(o.provenance == SelectionProvenance::kPayoffDominant);
  CHECK(prob(o.selected.row, 0) == 1);
  CHECK(o.selected.row == o.selected.col);
  CHECK(o.num_equilibria == 3);
  CHECK(o.num_symmetric == 3);
  CHECK(o.pareto_deleted.size() == 2);
}

TEST_CASE("logit trace from uniform lands on the risk-dominant side") {
  SymmetricGame g = make_game({{4, 0}, {3, 3}});
  TraceResult t = logit_trace(g, {0.5, 0.5});
  REQUIRE(t.converged);
  // Against the uniform prior action 2 earns 3 > 2, and the gap widens
  // along the path, so the trace ends at the risk-dominant equilibrium.
  CHECK(t.row[1] > 1.0 - 1e-6);
  CHECK(t.col[1] > 1.0 - 1e-6);

  SymmetricGame h = make_game({{9, 0}, {8, 7}});
  TraceResult th = logit_trace(h, {0.5, 0.5});
  REQUIRE(th.converged);
  CHECK(th.row[1] > 1.0 - 1e-6);  // (7,7) risk-dominates (9,9)
}

TEST_CASE("unique symmetric equilibrium short-circuits selection") {
  SelectionOutcome o = hs_select(ar_basic_matrix());
  REQUIRE(o.resolved);
  CHECK(o.provenance == SelectionProvenance::kUniqueSymmetric);
  CHECK(prob(o.selected.row, 4) == Rational(1, 4));
  CHECK(o.selected.row == o.selected.col);
}

TEST_CASE("selection always returns a symmetric profile") {
  Rng rng(905);
  for (int trial = 0; trial < 120; ++trial) {
    SymmetricGame g = make_game({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    for (auto& row : g.payoff)
      for (auto& cell : row) cell = (long long)(rng.uniform_int(9)) - 4;
    SelectionOutcome o = hs_select(g);
    if (!o.resolved) continue;
    CHECK(o.selected.row == o.selected.col);
    CHECK(is_nash_equilibrium(g, o.selected.row, o.selected.col));
  }
}

TEST_CASE("exhausted budget reports unresolved") {
  SolveOptions opt;
  opt.time_budget_seconds = 0.0;
  NashResult r = enumerate_nash(ar_basic_matrix(), opt);
  CHECK(!r.resolved);

  SelectionOutcome o = hs_select(ar_basic_matrix(), opt);
  CHECK(!o.resolved);
  CHECK(o.provenance == SelectionProvenance::kUnresolved);
}

TEST_CASE("action cap reports unresolved") {
  SolveOptions opt;
  opt.max_actions = 5;
  NashResult r = enumerate_nash(ar_basic_matrix(), opt);
  CHECK(!r.resolved);
}
