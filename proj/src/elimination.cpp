#include "tac/elimination.hpp"

#include <algorithm>
#include <map>

namespace tac {

OrderResult elimination_order(const VarGraph& g, const std::vector<VarId>& keep) {
  std::map<VarId, std::set<VarId>> adj;
  std::map<VarId, std::string> label;
  for (size_t i = 0; i < g.vars.size(); ++i) {
    adj[g.vars[i]];
    label[g.vars[i]] = i < g.names.size() ? g.names[i] : std::to_string(g.vars[i]);
  }
  for (auto [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }

  std::set<VarId> keep_set(keep.begin(), keep.end());
  std::set<VarId> pending;
  for (VarId v : g.vars)
    if (!keep_set.count(v)) pending.insert(v);

  OrderResult r;
  while (!pending.empty()) {
    VarId best = kNoVar;
    int64_t best_fill = -1;
    for (VarId v : pending) {
      // count missing edges among v's remaining neighbors
      std::vector<VarId> nb;
      for (VarId u : adj[v])
        if (pending.count(u) || keep_set.count(u)) nb.push_back(u);
      int64_t fill = 0;
      for (size_t i = 0; i < nb.size(); ++i)
        for (size_t j = i + 1; j < nb.size(); ++j)
          if (!adj[nb[i]].count(nb[j])) ++fill;
      if (best == kNoVar || fill < best_fill ||
          (fill == best_fill && label[v] < label[best])) {
        best = v;
        best_fill = fill;
      }
    }

    std::vector<VarId> nb;
    for (VarId u : adj[best])
      if (pending.count(u) || keep_set.count(u)) nb.push_back(u);
    r.width = std::max(r.width, (int)nb.size());
    for (size_t i = 0; i < nb.size(); ++i)
      for (size_t j = i + 1; j < nb.size(); ++j) {
        adj[nb[i]].insert(nb[j]);
        adj[nb[j]].insert(nb[i]);
      }
    for (VarId u : nb) adj[u].erase(best);
    adj.erase(best);
    pending.erase(best);
    r.order.push_back(best);
  }
  return r;
}

EliminationPlan make_plan(const std::vector<std::vector<VarId>>& scopes, int root,
                          const std::vector<VarId>& keep,
                          const std::function<std::string(VarId)>& name) {
  EliminationPlan plan;

  VarGraph g;
  std::set<VarId> seen;
  for (const auto& sc : scopes)
    for (size_t i = 0; i < sc.size(); ++i) {
      if (seen.insert(sc[i]).second) {
        g.vars.push_back(sc[i]);
        g.names.push_back(name ? name(sc[i]) : std::to_string(sc[i]));
      }
      for (size_t j = i + 1; j < sc.size(); ++j) g.edges.emplace_back(sc[i], sc[j]);
    }

  OrderResult ord = elimination_order(g, keep);
  plan.var_order = ord.order;
  plan.width = ord.width;

  // Merge the non-root factors containing each ordered variable; the root
  // only receives factors in the final stage (mirrors message flow toward
  // a jointree root).
  std::vector<bool> live(scopes.size(), true);
  std::vector<std::set<VarId>> scope_sets;
  for (const auto& sc : scopes) scope_sets.emplace_back(sc.begin(), sc.end());

  for (VarId v : ord.order) {
    int target = -1;
    for (size_t f = 0; f < scopes.size(); ++f) {
      if (!live[f] || (int)f == root || !scope_sets[f].count(v)) continue;
      if (target < 0) {
        target = (int)f;
      } else {
        plan.steps.push_back({(int)f, target});
        live[f] = false;
        scope_sets[target].insert(scope_sets[f].begin(), scope_sets[f].end());
      }
    }
  }

  int survivor = root;
  for (size_t f = 0; f < scopes.size(); ++f) {
    if (!live[f] || (int)f == root) continue;
    if (survivor < 0)
      survivor = (int)f;
    else
      plan.steps.push_back({(int)f, survivor});
  }
  if (survivor < 0) throw FactorError("make_plan: no factors");
  plan.root = survivor;
  return plan;
}

}  // namespace tac
