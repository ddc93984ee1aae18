#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "tac/factor.hpp"
#include "tac/model.hpp"

namespace tac {

// Variable interaction graph: vars adjacent iff they co-occur in a factor.
struct VarGraph {
  std::vector<VarId> vars;
  std::vector<std::string> names;  // optional, for tie-breaking; else ids
  std::vector<std::pair<VarId, VarId>> edges;
};

struct OrderResult {
  std::vector<VarId> order;  // vars to eliminate, in order
  int width = 0;             // induced width (max clique size - 1)
};

// Min-fill with deterministic lexicographic tie-breaking. Variables in
// `keep` are not ordered (they survive elimination).
OrderResult elimination_order(const VarGraph& g, const std::vector<VarId>& keep = {});

// Factor-level schedule: each step sums the variables that occur only in
// `eliminate` out of it and multiplies the result into `into`.
struct EliminationStep {
  int eliminate = -1;
  int into = -1;
};

struct EliminationPlan {
  std::vector<EliminationStep> steps;
  int root = -1;  // surviving factor (plan picks one when unspecified)
  int width = 0;
  std::vector<VarId> var_order;
};

// Derives a plan from a min-fill order over the factors' scopes. `root`
// may be -1, in which case the plan chooses the survivor. Variables in
// `keep` are never summed out.
EliminationPlan make_plan(const std::vector<std::vector<VarId>>& scopes, int root,
                          const std::vector<VarId>& keep,
                          const std::function<std::string(VarId)>& name = nullptr);

// Runs the plan and returns the surviving factor summed down to `keep`
// (intersected with its scope). Throws FactorError on an inconsistent plan.
template <typename Ops>
Factor<typename Ops::Cell> eliminate_all_except(
    std::vector<Factor<typename Ops::Cell>> factors, const EliminationPlan& plan,
    const std::vector<VarId>& keep, const Ops& ops) {
  using Cell = typename Ops::Cell;
  if (factors.empty()) throw FactorError("eliminate_all_except: no factors");
  if (plan.root < 0 || plan.root >= (int)factors.size())
    throw FactorError("eliminate_all_except: plan root out of range");

  std::vector<bool> live(factors.size(), true);
  std::set<VarId> keep_set(keep.begin(), keep.end());

  auto vars_only_in = [&](int f) {
    std::vector<VarId> only;
    for (VarId v : factors[f].scope) {
      if (keep_set.count(v)) continue;
      bool elsewhere = false;
      for (size_t g = 0; g < factors.size(); ++g) {
        if ((int)g == f || !live[g]) continue;
        if (factors[g].has_var(v)) { elsewhere = true; break; }
      }
      if (!elsewhere) only.push_back(v);
    }
    return only;
  };

  for (const EliminationStep& s : plan.steps) {
    if (s.eliminate < 0 || s.eliminate >= (int)factors.size() || s.into < 0 ||
        s.into >= (int)factors.size() || s.eliminate == s.into)
      throw FactorError("eliminate_all_except: malformed step");
    if (!live[s.eliminate] || !live[s.into])
      throw FactorError("eliminate_all_except: step uses a dead factor");
    if (s.eliminate == plan.root)
      throw FactorError("eliminate_all_except: plan eliminates the root");
    live[s.eliminate] = false;
    Factor<Cell> shrunk = sum_out(factors[s.eliminate], vars_only_in(s.eliminate), ops);
    factors[s.into] = multiply(factors[s.into], shrunk, ops);
    factors[s.eliminate] = Factor<Cell>{};
  }
  for (size_t f = 0; f < factors.size(); ++f)
    if (live[f] && (int)f != plan.root)
      throw FactorError("eliminate_all_except: plan leaves extra live factors");

  Factor<Cell>& root = factors[plan.root];
  std::vector<VarId> final_sum;
  for (VarId v : root.scope)
    if (!keep_set.count(v)) final_sum.push_back(v);
  return sum_out(root, final_sum, ops);
}

}  // namespace tac
