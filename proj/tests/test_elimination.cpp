#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "tac/elimination.hpp"

using namespace tac;

namespace {

// exhaustive induced-width search over all elimination orders
int optimal_width(int n, std::vector<std::pair<VarId, VarId>> edges,
                  const std::set<VarId>& keep) {
  std::vector<VarId> vars;
  for (int v = 0; v < n; ++v)
    if (!keep.count(v)) vars.push_back(v);
  std::sort(vars.begin(), vars.end());

  int best = n + 1;
  do {
    std::map<VarId, std::set<VarId>> adj;
    for (int v = 0; v < n; ++v) adj[v];
    for (auto [a, b] : edges) {
      adj[a].insert(b);
      adj[b].insert(a);
    }
    int width = 0;
    for (VarId v : vars) {
      width = std::max(width, (int)adj[v].size());
      std::vector<VarId> nb(adj[v].begin(), adj[v].end());
      for (size_t i = 0; i < nb.size(); ++i)
        for (size_t j = i + 1; j < nb.size(); ++j) {
          adj[nb[i]].insert(nb[j]);
          adj[nb[j]].insert(nb[i]);
        }
      for (VarId u : nb) adj[u].erase(v);
      adj.erase(v);
    }
    best = std::min(best, width);
  } while (std::next_permutation(vars.begin(), vars.end()));
  return best;
}

}  // namespace

TEST_CASE("chain A-B-C eliminated around C has width 1") {
  VarGraph g;
  g.vars = {0, 1, 2};
  g.names = {"A", "B", "C"};
  g.edges = {{0, 1}, {1, 2}};
  OrderResult r = elimination_order(g, {2});
  CHECK(r.order.size() == 2);
  CHECK(r.width == 1);
}

TEST_CASE("4-cycle has induced width 2 and min-fill matches the optimum") {
  VarGraph g;
  g.vars = {0, 1, 2, 3};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  OrderResult r = elimination_order(g, {});
  CHECK(r.width == 2);
  CHECK(optimal_width(4, g.edges, {}) == 2);
}

TEST_CASE("single variable: empty order, width 0") {
  VarGraph g;
  g.vars = {0};
  OrderResult kept = elimination_order(g, {0});
  CHECK(kept.order.empty());
  CHECK(kept.width == 0);
}

TEST_CASE("min-fill never beats the exhaustive optimum on small graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 3 + static_cast<int>(rng() % 4);  // up to 6 nodes
    VarGraph g;
    std::set<std::pair<VarId, VarId>> edges;
    for (int v = 0; v < n; ++v) g.vars.push_back(v);
    int m = 2 + static_cast<int>(rng() % (n * (n - 1) / 2));
    for (int e = 0; e < m; ++e) {
      VarId a = static_cast<VarId>(rng() % n);
      VarId b = static_cast<VarId>(rng() % n);
      if (a == b) continue;
      edges.insert(std::make_pair(std::min(a, b), std::max(a, b)));
    }
    g.edges.assign(edges.begin(), edges.end());

    OrderResult r = elimination_order(g, {});
    int opt = optimal_width(n, g.edges, {});
    CHECK(r.width >= opt);
    CHECK((int)r.order.size() == n);
  }
}

TEST_CASE("ties break lexicographically by name") {
  VarGraph g;
  g.vars = {0, 1};
  g.names = {"beta", "alpha"};
  OrderResult r = elimination_order(g, {});
  REQUIRE(r.order.size() == 2);
  CHECK(r.order[0] == 1);  // "alpha" first
}

TEST_CASE("make_plan covers every non-root factor exactly once") {
  std::vector<std::vector<VarId>> scopes{{0}, {0, 1}, {0, 2}, {2, 3}};
  EliminationPlan plan = make_plan(scopes, 1, {1});
  CHECK(plan.root == 1);
  std::set<int> eliminated;
  for (auto& s : plan.steps) {
    CHECK(s.eliminate != plan.root);
    CHECK(eliminated.insert(s.eliminate).second);
  }
  CHECK(eliminated.size() == scopes.size() - 1);
}

TEST_CASE("make_plan without a designated root picks a survivor") {
  std::vector<std::vector<VarId>> scopes{{0}, {0, 1}};
  EliminationPlan plan = make_plan(scopes, -1, {1});
  CHECK(plan.root >= 0);
  CHECK(plan.steps.size() == 1);
}
