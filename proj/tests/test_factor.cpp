#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "support/generators.hpp"
#include "tac/analysis.hpp"
#include "tac/elimination.hpp"
#include "tac/factor.hpp"
#include "tac/model_io.hpp"

using namespace tac;

namespace {

Factor<double> make(std::vector<VarId> scope, std::vector<int> cards,
                    std::vector<double> cells) {
  return Factor<double>{std::move(scope), std::move(cards), std::move(cells)};
}

}  // namespace

TEST_CASE("pointwise product over a shared variable") {
  NumericOps ops;
  auto f = make({0}, {2}, {0.6, 0.4});
  auto g = make({0}, {2}, {0.5, 0.5});
  auto r = multiply(f, g, ops);
  CHECK(r.scope == std::vector<VarId>{0});
  CHECK(r.cells[0] == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(r.cells[1] == doctest::Approx(0.20).epsilon(1e-15));
}

TEST_CASE("product with disjoint scopes replicates rows, last var fastest") {
  NumericOps ops;
  auto f = make({0}, {2}, {0.6, 0.4});
  auto g = make({1}, {2}, {1.0, 1.0});
  auto r = multiply(f, g, ops);
  CHECK(r.scope == std::vector<VarId>{0, 1});
  CHECK(r.cells == std::vector<double>{0.6, 0.6, 0.4, 0.4});
}

TEST_CASE("sum_out basics") {
  NumericOps ops;
  SUBCASE("sum out everything leaves the normalization scalar") {
    auto f = make({0}, {2}, {0.3, 0.7});
    auto r = sum_out(f, {0}, ops);
    CHECK(r.scope.empty());
    CHECK(r.cells.size() == 1);
    CHECK(r.cells[0] == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("sum out the empty set is the identity") {
    auto f = make({0, 2}, {2, 2}, {1, 2, 3, 4});
    auto r = sum_out(f, {}, ops);
    CHECK(r.cells == f.cells);
    CHECK(r.scope == f.scope);
  }
  SUBCASE("variable not in scope errors") {
    auto f = make({0}, {2}, {0.5, 0.5});
    CHECK_THROWS_AS(sum_out(f, {5}, ops), FactorError);
  }
  SUBCASE("nested sum_out equals joint sum_out") {
    std::mt19937_64 rng(3);
    auto cell = [&]() { return testgen::unit(rng); };
    auto f = make({0, 1, 2}, {2, 3, 2}, {});
    f.cells.resize(12);
    for (auto& c : f.cells) c = cell();
    auto a = sum_out(sum_out(f, {0}, ops), {2}, ops);
    auto b = sum_out(f, {0, 2}, ops);
    REQUIRE(a.cells.size() == b.cells.size());
    for (size_t i = 0; i < a.cells.size(); ++i)
      CHECK(a.cells[i] == doctest::Approx(b.cells[i]).epsilon(1e-12));
  }
}

TEST_CASE("multiply is commutative and associative in cell values") {
  std::mt19937_64 rng(11);
  NumericOps ops;
  for (int trial = 0; trial < 20; ++trial) {
    auto rnd_factor = [&](std::vector<VarId> scope, std::vector<int> cards) {
      Factor<double> f{std::move(scope), std::move(cards), {}};
      f.cells.resize(mixed_radix_size(f.cards));
      for (auto& c : f.cells) c = testgen::unit(rng);
      return f;
    };
    auto f = rnd_factor({0, 1}, {2, 2});
    auto g = rnd_factor({1, 2}, {2, 3});
    auto h = rnd_factor({2}, {3});

    auto fg = multiply(f, g, ops);
    auto gf = multiply(g, f, ops);
    REQUIRE(fg.scope == gf.scope);
    for (size_t i = 0; i < fg.cells.size(); ++i)
      CHECK(fg.cells[i] == doctest::Approx(gf.cells[i]).epsilon(1e-12));

    auto a = multiply(multiply(f, g, ops), h, ops);
    auto b = multiply(f, multiply(g, h, ops), ops);
    REQUIRE(a.scope == b.scope);
    for (size_t i = 0; i < a.cells.size(); ++i)
      CHECK(a.cells[i] == doctest::Approx(b.cells[i]).epsilon(1e-12));
  }
}

namespace {

// independent reference: multiply all factors into one table and sum
Factor<double> brute_product_marginal(const std::vector<Factor<double>>& factors,
                                      const std::vector<VarId>& keep) {
  NumericOps ops;
  Factor<double> acc = factors[0];
  for (size_t i = 1; i < factors.size(); ++i) acc = multiply(acc, factors[i], ops);
  std::vector<VarId> drop;
  for (VarId v : acc.scope)
    if (std::find(keep.begin(), keep.end(), v) == keep.end()) drop.push_back(v);
  return sum_out(acc, drop, ops);
}

std::vector<Factor<double>> model_factors(const TbnModel& m, const Evidence& ev) {
  std::vector<Factor<double>> fs;
  for (VarId v = 0; v < m.size(); ++v) {
    const Cpt& c = m.cpt(v);
    Factor<double> f;
    f.scope = c.parents;
    f.scope.push_back(v);
    std::sort(f.scope.begin(), f.scope.end());
    for (VarId s : f.scope) f.cards.push_back(m.var(s).card());
    f.cells.resize(mixed_radix_size(f.cards));
    std::vector<int> pcards;
    for (VarId p : c.parents) pcards.push_back(m.var(p).card());
    std::vector<int> digits;
    for (int64_t idx = 0; idx < f.size(); ++idx) {
      mixed_radix_decode(f.cards, idx, digits);
      std::vector<int> ud(c.parents.size());
      int x = 0;
      for (size_t s = 0; s < f.scope.size(); ++s) {
        if (f.scope[s] == v) {
          x = digits[s];
          continue;
        }
        for (size_t pi = 0; pi < c.parents.size(); ++pi)
          if (c.parents[pi] == f.scope[s]) ud[pi] = digits[s];
      }
      double cell = c.entries[mixed_radix_index(pcards, ud) * m.var(v).card() + x];
      if (ev.has(v)) cell *= ev.likelihoods.at(v)[x];
      f.cells[idx] = cell;
    }
    fs.push_back(std::move(f));
  }
  return fs;
}

}  // namespace

TEST_CASE("eliminate_all_except: single factor returns the root projected") {
  NumericOps ops;
  std::vector<Factor<double>> fs{make({0}, {2}, {0.3, 0.7})};
  EliminationPlan plan = make_plan({fs[0].scope}, 0, {0});
  auto r = eliminate_all_except(fs, plan, {0}, ops);
  CHECK(r.cells == std::vector<double>{0.3, 0.7});
}

TEST_CASE("concrete elimination equals joint enumeration on a 3-node chain") {
  std::vector<Variable> vars{{"A", {"a", "~a"}}, {"B", {"b", "~b"}}, {"C", {"c", "~c"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(regular_cpt(0, {}, {0.6, 0.4}));
  cpts.push_back(regular_cpt(1, {0}, {0.9, 0.1, 0.2, 0.8}));
  cpts.push_back(regular_cpt(2, {1}, {0.3, 0.7, 0.5, 0.5}));
  TbnModel m(std::move(vars), std::move(cpts));
  Evidence ev;
  ev.likelihoods[0] = {0.5, 0.5};

  auto fs = model_factors(m, ev);
  std::vector<std::vector<VarId>> scopes;
  for (auto& f : fs) scopes.push_back(f.scope);
  EliminationPlan plan = make_plan(scopes, 2, {2});
  NumericOps ops;
  auto marg = eliminate_all_except(fs, plan, {2}, ops);

  QueryResult oracle = brute_force_query(m, ev, 2);
  REQUIRE(marg.cells.size() == oracle.joint.size());
  for (size_t s = 0; s < 2; ++s)
    CHECK(std::abs(marg.cells[s] - oracle.joint[s]) <= 1e-12);
}

TEST_CASE("concrete elimination equals enumeration on random models") {
  std::mt19937_64 rng(99);
  NumericOps ops;
  for (int trial = 0; trial < 60; ++trial) {
    testgen::ModelOptions opt;
    opt.max_states = 2;
    TbnModel m = testgen::random_model(rng, opt);
    VarId q = static_cast<VarId>(rng() % m.size());
    Evidence ev = testgen::random_evidence(rng, m, q);

    auto fs = model_factors(m, ev);
    std::vector<std::vector<VarId>> scopes;
    for (auto& f : fs) scopes.push_back(f.scope);
    EliminationPlan plan = make_plan(scopes, static_cast<int>(q), {q});
    auto marg = eliminate_all_except(fs, plan, {q}, ops);

    // route 1: the independent enumeration oracle
    QueryResult oracle = brute_force_query(m, ev, q);
    // route 2: naive full factor product
    auto naive = brute_product_marginal(fs, {q});

    for (size_t s = 0; s < marg.cells.size(); ++s) {
      CHECK(std::abs(marg.cells[s] - oracle.joint[s]) <= 1e-12);
      CHECK(std::abs(marg.cells[s] - naive.cells[s]) <= 1e-12);
    }
  }
}

TEST_CASE("plan validation catches misuse") {
  NumericOps ops;
  std::vector<Factor<double>> fs{make({0}, {2}, {1, 1}), make({0}, {2}, {1, 1})};
  EliminationPlan bad;
  bad.root = 0;
  bad.steps.push_back({0, 1});  // eliminates the root
  CHECK_THROWS_AS(eliminate_all_except(fs, bad, {0}, ops), FactorError);

  EliminationPlan dangling;
  dangling.root = 0;
  dangling.steps.push_back({1, 1});
  CHECK_THROWS_AS(eliminate_all_except(fs, dangling, {0}, ops), FactorError);
}
