#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/generators.hpp"
#include "tac/analysis.hpp"
#include "tac/model.hpp"
#include "tac/model_io.hpp"

using namespace tac;

namespace {

TbnModel chain_abc() {
  // A -> B -> C, all binary
  std::vector<Variable> vars{{"A", {"a", "~a"}}, {"B", {"b", "~b"}}, {"C", {"c", "~c"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(regular_cpt(0, {}, {0.6, 0.4}));
  cpts.push_back(regular_cpt(1, {0}, {0.9, 0.1, 0.2, 0.8}));
  cpts.push_back(regular_cpt(2, {1}, {0.3, 0.7, 0.5, 0.5}));
  return TbnModel(std::move(vars), std::move(cpts));
}

// Figure 4(b): A,B,C binary; edges A->B, A->C; B testing
TbnModel fig4_model() {
  std::vector<Variable> vars{{"A", {"a", "~a"}}, {"B", {"b", "~b"}}, {"C", {"c", "~c"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(regular_cpt(0, {}, {0.6, 0.4}));
  cpts.push_back(testing_cpt(1, {0}, {0.3, 0.7}, {0.8, 0.2, 0.3, 0.7}, {0.1, 0.9, 0.6, 0.4}));
  cpts.push_back(regular_cpt(2, {0}, {0.25, 0.75, 0.5, 0.5}));
  return TbnModel(std::move(vars), std::move(cpts));
}

}  // namespace

TEST_CASE("smallest model: one binary node") {
  const char* text = R"({
    "variables": [{"name": "A", "states": ["a0", "a1"]}],
    "cpts": [{"child": "A", "parents": [], "kind": "regular",
              "rows": [{"given": [], "probs": [0.5, 0.5]}]}]
  })";
  TbnModel m = load_model(text);
  CHECK(m.size() == 1);
  CHECK(m.parents(0).empty());
  CHECK(m.cpt(0).entries == std::vector<double>{0.5, 0.5});
}

TEST_CASE("non-normalized row is rejected and names the row") {
  const char* text = R"({
    "variables": [{"name": "A", "states": ["a0", "a1"]}],
    "cpts": [{"child": "A", "parents": [], "rows": [{"given": [], "probs": [0.5, 0.4]}]}]
  })";
  CHECK_THROWS_WITH_AS(load_model(text),
                       doctest::Contains("row sums to 0.9"), ModelError);
  // the auto-renormalize escape hatch
  TbnModel m = load_model(text, /*auto_renormalize=*/true);
  CHECK(m.cpt(0).entries[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("testing root is rejected") {
  std::vector<Variable> vars{{"A", {"a0", "a1"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(testing_cpt(0, {}, {0.5}, {0.5, 0.5}, {0.5, 0.5}));
  CHECK_THROWS_WITH_AS(TbnModel(std::move(vars), std::move(cpts)),
                       doctest::Contains("root nodes are always regular"), ModelError);
}

TEST_CASE("figure 4(b) model: counts per the testing-CPT formulas") {
  TbnModel m = fig4_model();
  CHECK(m.testing_count() == 1);
  ParamCounts pc = m.parameter_count();
  CHECK(pc.thresholds == 2);       // one per state of A
  CHECK(pc.dynamic_params == 8);   // 2 * m * n = 2*2*2
  CHECK(pc.static_params == 6);    // A: 2, C: 4
}

TEST_CASE("figure 3(b) diamond: 30 parameters, 6 thresholds") {
  // A,B,C,D binary; B,D testing; edges A->B, A->C, B->D, C->D
  std::vector<Variable> vars{
      {"A", {"1", "0"}}, {"B", {"1", "0"}}, {"C", {"1", "0"}}, {"D", {"1", "0"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(regular_cpt(0, {}, {0.5, 0.5}));
  cpts.push_back(testing_cpt(1, {0}, {0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}));
  cpts.push_back(regular_cpt(2, {0}, {0.5, 0.5, 0.5, 0.5}));
  cpts.push_back(testing_cpt(3, {1, 2}, std::vector<double>(4, 0.5),
                             std::vector<double>(16, 0.5), std::vector<double>(16, 0.5)));
  TbnModel m(std::move(vars), std::move(cpts));
  ParamCounts pc = m.parameter_count();
  CHECK(pc.static_params + pc.dynamic_params == 30);
  CHECK(pc.thresholds == 6);
}

TEST_CASE("testing node m=2 states, n=4 parent states: 4 thresholds, 16 dynamics") {
  std::vector<Variable> vars{{"P1", {"1", "0"}}, {"P2", {"1", "0"}}, {"X", {"1", "0"}}};
  std::vector<Cpt> cpts;
  cpts.push_back(regular_cpt(0, {}, {0.5, 0.5}));
  cpts.push_back(regular_cpt(1, {}, {0.5, 0.5}));
  cpts.push_back(testing_cpt(2, {0, 1}, std::vector<double>(4, 0.5),
                             std::vector<double>(16, 0.5), std::vector<double>(16, 0.5)));
  TbnModel m(std::move(vars), std::move(cpts));
  ParamCounts pc = m.parameter_count();
  CHECK(pc.thresholds == 4);
  CHECK(pc.dynamic_params == 16);
}

TEST_CASE("prune: barren leaf removed, relevant chain kept") {
  TbnModel m = chain_abc();
  TbnModel pruned = m.prune_for_query(m.require("B"), {m.require("A")});
  CHECK(pruned.size() == 2);
  CHECK(!pruned.find("C"));

  TbnModel kept = m.prune_for_query(m.require("C"), {m.require("A")});
  CHECK(kept.size() == 3);
}

TEST_CASE("prune: fig 4 with full evidence removes nothing; prune is idempotent") {
  TbnModel m = fig4_model();
  VarId q = m.require("B");
  std::vector<VarId> ev{m.require("A"), m.require("C")};
  TbnModel p1 = m.prune_for_query(q, ev);
  CHECK(p1.size() == 3);
  TbnModel p2 = p1.prune_for_query(p1.require("B"), {p1.require("A"), p1.require("C")});
  CHECK(p2.structurally_equal(p1));
}

TEST_CASE("prune preserves the query posterior on random models") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 100; ++trial) {
    testgen::ModelOptions opt;
    opt.max_testing = trial % 3 == 0 ? 2 : 0;
    TbnModel m = testgen::random_model(rng, opt);
    VarId q = static_cast<VarId>(rng() % m.size());
    Evidence ev = testgen::random_evidence(rng, m, q);

    QueryResult before = select_then_infer(m, ev, q);

    TbnModel pruned = m.prune_for_query(q, testgen::evidence_vars(ev));
    Evidence pev;
    for (const auto& [v, lam] : ev.likelihoods)
      pev.likelihoods[pruned.require(m.var(v).name)] = lam;
    QueryResult after = select_then_infer(pruned, pev, pruned.require(m.var(q).name));

    REQUIRE(before.joint.size() == after.joint.size());
    for (size_t s = 0; s < before.joint.size(); ++s) {
      // joints differ by the pruned leaves' sums (each 1), posteriors match
      CHECK(before.joint[s] == doctest::Approx(after.joint[s]).epsilon(1e-12));
      CHECK(std::abs(before.posterior[s] - after.posterior[s]) <= 1e-12);
    }
  }
}

TEST_CASE("model file round trip is structurally equal") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    testgen::ModelOptions opt;
    opt.max_testing = 2;
    TbnModel m = testgen::random_model(rng, opt);
    TbnModel back = load_model(save_model(m));
    CHECK(back.structurally_equal(m));
  }
}

TEST_CASE("conformance fixture parses to the expected model") {
  std::ifstream in(std::string(TEST_DATA_DIR) + "/fig4_model.json");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  TbnModel m = load_model(ss.str());
  CHECK(m.size() == 3);
  CHECK(m.is_testing(m.require("B")));
  CHECK(m.cpt(m.require("B")).thresholds == std::vector<double>{0.3, 0.7});
  CHECK(m.structurally_equal(fig4_model()));
}

TEST_CASE("evidence validation") {
  TbnModel m = chain_abc();
  Evidence good;
  good.likelihoods[0] = {0.5, 0.5};
  m.validate_evidence(good);

  Evidence bad;
  bad.likelihoods[0] = {0.5, 0.6};
  CHECK_THROWS_AS(m.validate_evidence(bad), ModelError);

  Evidence wrong_len;
  wrong_len.likelihoods[0] = {1.0};
  CHECK_THROWS_AS(m.validate_evidence(wrong_len), ModelError);
}

TEST_CASE("unknown variable errors") {
  TbnModel m = chain_abc();
  CHECK_THROWS_AS(m.require("Z"), ModelError);
}
