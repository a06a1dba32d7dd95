#include "gamelab/equilibria.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>

namespace gamelab {

namespace {

// Gaussian elimination on an m x (m+1) augmented rational system.
enum class SolveStatus { kUnique, kInconsistent, kUnderdetermined };

SolveStatus solve_linear(std::vector<std::vector<Rational>> aug,
                         std::vector<Rational>& out) {
  std::size_t m = aug.size();
  std::vector<std::size_t> pivot_col(m, SIZE_MAX);
  std::size_t row = 0;
  for (std::size_t col = 0; col < m && row < m; ++col) {
    std::size_t piv = SIZE_MAX;
    for (std::size_t r = row; r < m; ++r) {
      if (aug[r][col] != 0) {
        piv = r;
        break;
      }
    }
    if (piv == SIZE_MAX) continue;
    std::swap(aug[row], aug[piv]);
    Rational lead = aug[row][col];
    for (std::size_t c = col; c <= m; ++c) aug[row][c] /= lead;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == row || aug[r][col] == 0) continue;
      Rational f = aug[r][col];
      for (std::size_t c = col; c <= m; ++c) aug[r][c] -= f * aug[row][c];
    }
    pivot_col[row] = col;
    ++row;
  }
  for (std::size_t r = row; r < m; ++r)
    if (aug[r][m] != 0) return SolveStatus::kInconsistent;
  if (row < m) return SolveStatus::kUnderdetermined;
  out.assign(m, Rational(0));
  for (std::size_t r = 0; r < m; ++r) out[pivot_col[r]] = aug[r][m];
  return SolveStatus::kUnique;
}

bool next_combination(std::vector<int>& c, int n) {
  int k = int(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Iterated elimination of pure strategies strictly dominated by other pure
// strategies. Symmetric game, so one alive set serves both players.
std::vector<int> surviving_actions(const SymmetricGame& g) {
  int n = g.num_actions();
  std::vector<int> alive(n);
  for (int i = 0; i < n; ++i) alive[i] = i;
  bool changed = true;
  while (changed && alive.size() > 1) {
    changed = false;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      int i = alive[a];
      bool dominated = false;
      for (int k : alive) {
        if (k == i) continue;
        bool strict = true;
        for (int j : alive) {
          if (g.at(k, j) <= g.at(i, j)) {
            strict = false;
            break;
          }
        }
        if (strict) {
          dominated = true;
          break;
        }
      }
      if (dominated) {
        alive.erase(alive.begin() + a);
        changed = true;
        break;
      }
    }
  }
  return alive;
}

}  // namespace

bool is_nash_equilibrium(const SymmetricGame& g, const MixedStrategy& row,
                         const MixedStrategy& col) {
  int n = g.num_actions();
  if (int(row.probs.size()) != n || int(col.probs.size()) != n) return false;
  Rational sum_r = 0, sum_c = 0;
  for (int i = 0; i < n; ++i) {
    if (row.probs[i] < 0 || col.probs[i] < 0) return false;
    sum_r += row.probs[i];
    sum_c += col.probs[i];
  }
  if (sum_r != 1 || sum_c != 1) return false;
  std::vector<Rational> row_payoffs(n, Rational(0)), col_payoffs(n, Rational(0));
  for (int a = 0; a < n; ++a) {
    for (int j = 0; j < n; ++j) row_payoffs[a] += Rational(g.at(a, j)) * col.probs[j];
    for (int i = 0; i < n; ++i) col_payoffs[a] += row.probs[i] * Rational(g.at(a, i));
  }
  Rational v = 0, w = 0;
  for (int i = 0; i < n; ++i) {
    v += row.probs[i] * row_payoffs[i];
    w += col.probs[i] * col_payoffs[i];
  }
  for (int a = 0; a < n; ++a) {
    if (row_payoffs[a] > v) return false;
    if (col_payoffs[a] > w) return false;
  }
  return true;
}

NashResult enumerate_nash(const SymmetricGame& g, const SolveOptions& opt) {
  NashResult res;
  int n = g.num_actions();
  if (n == 0) return res;
  if (n > opt.max_actions) {
    res.resolved = false;
    return res;
  }
  auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    auto dt = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double>(dt).count() > opt.time_budget_seconds;
  };

  std::vector<int> alive =
      opt.eliminate_dominated ? surviving_actions(g) : [&] {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return all;
      }();
  int m = int(alive.size());

  for (int k = 1; k <= m; ++k) {
    std::vector<int> rsel(k);
    for (int i = 0; i < k; ++i) rsel[i] = i;
    do {
      if ((res.supports_examined & 63) == 0 && out_of_time()) {
        res.resolved = false;
        return res;
      }
      std::vector<int> rows(k);
      for (int i = 0; i < k; ++i) rows[i] = alive[rsel[i]];

      // Columns that can be best responses against a mix on `rows`: drop any
      // alive column strictly beaten by another alive column on all of them.
      std::vector<int> cand;
      cand.reserve(m);
      for (int j : alive) {
        bool dominated = false;
        for (int j2 : alive) {
          if (j2 == j) continue;
          bool strict = true;
          for (int i : rows) {
            if (g.at(j2, i) <= g.at(j, i)) {
              strict = false;
              break;
            }
          }
          if (strict) {
            dominated = true;
            break;
          }
        }
        if (!dominated) cand.push_back(j);
      }
      if (int(cand.size()) < k) continue;

      std::vector<int> csel(k);
      for (int i = 0; i < k; ++i) csel[i] = i;
      do {
        ++res.supports_examined;
        if ((res.supports_examined & 63) == 0 && out_of_time()) {
          res.resolved = false;
          return res;
        }
        std::vector<int> cols(k);
        for (int i = 0; i < k; ++i) cols[i] = cand[csel[i]];

        // Column mix y making the supported rows indifferent.
        std::vector<std::vector<Rational>> aug(
            k + 1, std::vector<Rational>(k + 2, Rational(0)));
        for (int r = 0; r < k; ++r) {
          for (int c = 0; c < k; ++c) aug[r][c] = Rational(g.at(rows[r], cols[c]));
          aug[r][k] = -1;  // minus the value v
          aug[r][k + 1] = 0;
        }
        for (int c = 0; c < k; ++c) aug[k][c] = 1;
        aug[k][k + 1] = 1;
        std::vector<Rational> ysol;
        SolveStatus ys = solve_linear(std::move(aug), ysol);
        if (ys == SolveStatus::kUnderdetermined) {
          res.degenerate = true;
          continue;
        }
        if (ys == SolveStatus::kInconsistent) continue;
        bool interior = true;
        for (int c = 0; c < k; ++c)
          if (ysol[c] <= 0) {
            interior = false;
            break;
          }
        if (!interior) continue;
        Rational v = ysol[k];

        // Row mix x making the supported columns indifferent.
        std::vector<std::vector<Rational>> aug2(
            k + 1, std::vector<Rational>(k + 2, Rational(0)));
        for (int c = 0; c < k; ++c) {
          for (int r = 0; r < k; ++r) aug2[c][r] = Rational(g.at(cols[c], rows[r]));
          aug2[c][k] = -1;
          aug2[c][k + 1] = 0;
        }
        for (int r = 0; r < k; ++r) aug2[k][r] = 1;
        aug2[k][k + 1] = 1;
        std::vector<Rational> xsol;
        SolveStatus xs = solve_linear(std::move(aug2), xsol);
        if (xs == SolveStatus::kUnderdetermined) {
          res.degenerate = true;
          continue;
        }
        if (xs == SolveStatus::kInconsistent) continue;
        for (int r = 0; r < k; ++r)
          if (xsol[r] <= 0) {
            interior = false;
            break;
          }
        if (!interior) continue;
        Rational w = xsol[k];

        // Best-response verification against every original action.
        MixedStrategy x, y;
        x.probs.assign(n, Rational(0));
        y.probs.assign(n, Rational(0));
        for (int r = 0; r < k; ++r) x.probs[rows[r]] = xsol[r];
        for (int c = 0; c < k; ++c) y.probs[cols[c]] = ysol[c];
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
          Rational pr = 0, pc = 0;
          for (int c = 0; c < k; ++c) pr += Rational(g.at(a, cols[c])) * ysol[c];
          for (int r = 0; r < k; ++r) pc += xsol[r] * Rational(g.at(a, rows[r]));
          if (pr > v || pc > w) ok = false;
          bool in_rows = std::find(rows.begin(), rows.end(), a) != rows.end();
          bool in_cols = std::find(cols.begin(), cols.end(), a) != cols.end();
          if (!in_rows && pr == v) res.degenerate = true;
          if (!in_cols && pc == w) res.degenerate = true;
        }
        if (!ok) continue;
        res.equilibria.push_back(EquilibriumProfile{x, y, v, w});
      } while (next_combination(csel, int(cand.size())));
    } while (next_combination(rsel, m));
  }
  return res;
}

Rational risk_dominance_index(const SymmetricGame& g, const MixedStrategy& sigma) {
  int n = g.num_actions();
  if (int(sigma.probs.size()) != n)
    throw std::invalid_argument("strategy length does not match game");
  Rational total = 0;
  for (int i = 0; i < n; ++i) {
    if (sigma.probs[i] == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (i == j || sigma.probs[j] == 0) continue;
      Rational uii(g.at(i, i));
      total += sigma.probs[i] * sigma.probs[j] * (uii - Rational(g.at(j, i))) *
               (uii - Rational(g.at(i, j)));
    }
  }
  return total;
}

std::vector<EquilibriumComponent> equilibrium_components(
    const std::vector<EquilibriumProfile>& eqs) {
  int m = int(eqs.size());
  std::vector<int> parent(m);
  for (int i = 0; i < m; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

  auto strategy_key = [](const MixedStrategy& s) {
    std::string key;
    for (const auto& p : s.probs) {
      key += rational_to_string(p);
      key += ',';
    }
    return key;
  };
  std::map<std::string, int> by_row, by_col;
  for (int i = 0; i < m; ++i) {
    std::string rk = strategy_key(eqs[i].row), ck = strategy_key(eqs[i].col);
    auto [rit, rnew] = by_row.try_emplace(rk, i);
    if (!rnew) unite(i, rit->second);
    auto [cit, cnew] = by_col.try_emplace(ck, i);
    if (!cnew) unite(i, cit->second);
  }

  std::map<int, EquilibriumComponent> comps;  // keyed by root, insertion by min index
  std::vector<int> order;
  for (int i = 0; i < m; ++i) {
    int root = find(i);
    auto it = comps.find(root);
    if (it == comps.end()) {
      it = comps.emplace(root, EquilibriumComponent{}).first;
      order.push_back(root);
    }
    auto& comp = it->second;
    if (comp.members.empty()) {
      comp.security_row = eqs[i].row_payoff;
      comp.security_col = eqs[i].col_payoff;
    } else {
      comp.security_row = std::min(comp.security_row, eqs[i].row_payoff);
      comp.security_col = std::min(comp.security_col, eqs[i].col_payoff);
    }
    comp.members.push_back(i);
    if (eqs[i].symmetric() && !comp.has_symmetric) {
      comp.has_symmetric = true;
      comp.first_symmetric = i;
    }
  }
  // Components ordered by their first member.
  std::vector<std::pair<int, EquilibriumComponent>> listed;
  for (auto& [root, comp] : comps) listed.emplace_back(comp.members.front(), std::move(comp));
  std::sort(listed.begin(), listed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<EquilibriumComponent> out;
  out.reserve(listed.size());
  for (auto& [first, comp] : listed) out.push_back(std::move(comp));
  return out;
}

const char* provenance_id(SelectionProvenance p) {
  switch (p) {
    case SelectionProvenance::kUniqueSymmetric: return "unique_symmetric";
    case SelectionProvenance::kPayoffDominant: return "payoff_dominant";
    case SelectionProvenance::kRiskDominant: return "risk_dominant";
    case SelectionProvenance::kTraced: return "traced";
    case SelectionProvenance::kTracedCoerced: return "traced_coerced";
    case SelectionProvenance::kFallbackFirst: return "fallback_first";
    case SelectionProvenance::kUnresolved: return "unresolved";
  }
  return "?";
}

namespace {

EquilibriumProfile coerce_symmetric(const SymmetricGame& g,
                                    const EquilibriumProfile& e) {
  EquilibriumProfile out;
  out.row = e.row;
  out.col = e.row;
  int n = g.num_actions();
  Rational u = 0;
  for (int i = 0; i < n; ++i) {
    if (e.row.probs[i] == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (e.row.probs[j] == 0) continue;
      u += e.row.probs[i] * e.row.probs[j] * Rational(g.at(i, j));
    }
  }
  out.row_payoff = u;
  out.col_payoff = u;
  return out;
}

double tv_distance(const std::vector<double>& a, const std::vector<Rational>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d += std::abs(a[i] - rational_to_double(b[i]));
  return d / 2.0;
}

}  // namespace

SelectionOutcome hs_select(const SymmetricGame& g, const SolveOptions& sopt,
                           const TraceOptions& topt) {
  SelectionOutcome out;
  NashResult nash = enumerate_nash(g, sopt);
  out.degenerate = nash.degenerate;
  out.num_equilibria = int(nash.equilibria.size());
  if (!nash.resolved || nash.equilibria.empty()) {
    out.resolved = false;
    out.provenance = SelectionProvenance::kUnresolved;
    out.note = nash.resolved ? "no equilibria found" : "solve budget exhausted";
    return out;
  }
  const auto& eqs = nash.equilibria;
  int sym_count = 0, sym_index = -1;
  for (int i = 0; i < int(eqs.size()); ++i) {
    if (eqs[i].symmetric()) {
      ++sym_count;
      if (sym_index < 0) sym_index = i;
    }
  }
  out.num_symmetric = sym_count;

  if (sym_count == 1) {
    out.resolved = true;
    out.selected = eqs[sym_index];
    out.provenance = SelectionProvenance::kUniqueSymmetric;
    out.num_components = int(equilibrium_components(eqs).size());
    return out;
  }

  std::vector<EquilibriumComponent> comps = equilibrium_components(eqs);
  out.num_components = int(comps.size());

  // Step 2: Pareto filter on security vectors, protecting symmetric components
  // from deletion by purely asymmetric ones.
  std::vector<bool> deleted(comps.size(), false);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    for (std::size_t l = 0; l < comps.size(); ++l) {
      if (l == k) continue;
      bool dominates = comps[l].security_row > comps[k].security_row &&
                       comps[l].security_col > comps[k].security_col;
      if (!dominates) continue;
      if (comps[k].has_symmetric && !comps[l].has_symmetric) {
        out.pareto_protected.push_back(int(k));
        continue;
      }
      deleted[k] = true;
      out.pareto_deleted.push_back(int(k));
      break;
    }
  }
  std::vector<int> survivors;
  for (std::size_t k = 0; k < comps.size(); ++k)
    if (!deleted[k]) survivors.push_back(int(k));

  // Step 3: restrict to components with symmetric equilibria; choose by
  // minimal risk-dominance index of the first symmetric member.
  std::vector<int> sym_survivors;
  for (int k : survivors)
    if (comps[k].has_symmetric) sym_survivors.push_back(k);

  int winner = -1;
  SelectionProvenance direct_prov = SelectionProvenance::kFallbackFirst;
  if (!sym_survivors.empty()) {
    if (survivors.size() == 1) {
      winner = survivors.front();
      direct_prov = SelectionProvenance::kPayoffDominant;
    } else {
      Rational best_r;
      for (int k : sym_survivors) {
        Rational r = risk_dominance_index(g, eqs[comps[k].first_symmetric].row);
        if (winner < 0 || r < best_r) {
          winner = k;
          best_r = r;
        }
      }
      direct_prov = SelectionProvenance::kRiskDominant;
    }
  } else {
    winner = survivors.front();
    direct_prov = SelectionProvenance::kFallbackFirst;
  }

  const auto& wc = comps[winner];
  out.resolved = true;

  // Step 4.
  if (wc.members.size() == 1 && comps[winner].has_symmetric) {
    out.selected = eqs[wc.members.front()];
    out.provenance = direct_prov;
    return out;
  }

  int n = g.num_actions();
  std::vector<double> prior(n, 1.0 / double(n));
  TraceResult trace = logit_trace(g, prior, topt);
  out.trace_ran = true;
  if (trace.converged) {
    int best = -1;
    double best_d = 0;
    for (int i = 0; i < int(eqs.size()); ++i) {
      double d = tv_distance(trace.row, eqs[i].row.probs) +
                 tv_distance(trace.col, eqs[i].col.probs);
      if (best < 0 || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    if (eqs[best].symmetric()) {
      out.selected = eqs[best];
      out.provenance = SelectionProvenance::kTraced;
    } else {
      out.selected = coerce_symmetric(g, eqs[best]);
      out.provenance = SelectionProvenance::kTracedCoerced;
    }
    return out;
  }
  out.selected = coerce_symmetric(g, eqs[wc.members.front()]);
  out.provenance = SelectionProvenance::kFallbackFirst;
  out.note = "trace failed to converge";
  return out;
}

}  // namespace gamelab
