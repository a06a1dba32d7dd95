#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gamelab/games.hpp"
#include "gamelab/rational.hpp"

namespace gamelab {

// Probabilities over the game's full action vector, exact.
struct MixedStrategy {
  std::vector<Rational> probs;
  bool operator==(const MixedStrategy&) const = default;
};

struct EquilibriumProfile {
  MixedStrategy row, col;
  Rational row_payoff, col_payoff;
  bool symmetric() const { return row == col; }
};

struct SolveOptions {
  int max_actions = 21;
  double time_budget_seconds = 30.0;
  bool eliminate_dominated = true;
};

struct NashResult {
  std::vector<EquilibriumProfile> equilibria;  // support enumeration order
  bool resolved = true;      // false: budget or size cap hit, list is partial
  bool degenerate = false;   // singular support systems or payoff ties seen
  std::uint64_t supports_examined = 0;
};

// All Nash equilibria via support enumeration with exact arithmetic, after
// iterated elimination of strictly dominated pure strategies. Complete for
// nondegenerate games; degenerate games yield vertex witnesses plus the flag.
NashResult enumerate_nash(const SymmetricGame& g, const SolveOptions& opt = {});

// Exact best-response check for a profile (used by solver and tests).
bool is_nash_equilibrium(const SymmetricGame& g, const MixedStrategy& row,
                         const MixedStrategy& col);

// R(sigma) = sum_{i != j} sigma_i sigma_j (U_ii - U_ji)(U_ii - U_ij).
// Zero for every pure strategy.
Rational risk_dominance_index(const SymmetricGame& g, const MixedStrategy& sigma);

struct EquilibriumComponent {
  std::vector<int> members;   // indices into the equilibrium list, ascending
  Rational security_row, security_col;  // min payoffs over members
  bool has_symmetric = false;
  int first_symmetric = -1;   // equilibrium index, -1 if none
};

// Groups equilibria into components: two profiles are adjacent when they
// share the row strategy or share the column strategy.
std::vector<EquilibriumComponent> equilibrium_components(
    const std::vector<EquilibriumProfile>& eqs);

struct TraceOptions {
  int alpha_steps = 200;
  double lambda_start = 1.0;
  double lambda_end = 1e4;
  int max_inner_iterations = 4000;
  double tolerance = 1e-12;
};

struct TraceResult {
  std::vector<double> row, col;  // path endpoint at alpha = 1
  bool converged = false;
  int steps_taken = 0;
};

// Discretized logit tracing homotopy on the blended game
// (1-alpha) * (payoffs against the prior) + alpha * (actual game),
// annealing logit precision along the path.
TraceResult logit_trace(const SymmetricGame& g, const std::vector<double>& prior,
                        const TraceOptions& opt = {});

enum class SelectionProvenance {
  kUniqueSymmetric,
  kPayoffDominant,
  kRiskDominant,
  kTraced,
  kTracedCoerced,
  kFallbackFirst,
  kUnresolved,
};

const char* provenance_id(SelectionProvenance p);

struct SelectionOutcome {
  bool resolved = false;
  EquilibriumProfile selected;   // row == col whenever resolved
  SelectionProvenance provenance = SelectionProvenance::kUnresolved;
  // Diagnostics.
  int num_equilibria = 0;
  int num_symmetric = 0;
  int num_components = 0;
  std::vector<int> pareto_deleted;   // component indices removed by the filter
  std::vector<int> pareto_protected; // would-be deletions blocked by symmetry
  bool degenerate = false;
  bool trace_ran = false;
  std::string note;
};

// Modified Harsanyi-Selten selection:
//   1. decompose into components;
//   2. delete components whose security vector is strictly Pareto-dominated,
//      except that a component containing a symmetric equilibrium is never
//      deleted by one containing none;
//   3. keep components with symmetric equilibria and pick the one whose first
//      symmetric member minimizes the risk-dominance index (ties: first);
//      with no symmetric survivor, fall back to the first Pareto survivor;
//   4. return a singleton symmetric winner directly; otherwise run the logit
//      trace from the uniform prior, snap the endpoint to the nearest
//      enumerated equilibrium in total-variation distance, and coerce the
//      result symmetric via its row strategy. Trace failure falls back to the
//      winner's first member coerced symmetric.
// A game with exactly one symmetric equilibrium short-circuits to it.
SelectionOutcome hs_select(const SymmetricGame& g, const SolveOptions& sopt = {},
                           const TraceOptions& topt = {});

}  // namespace gamelab
