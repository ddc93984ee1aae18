#include "support/generators.hpp"

#include <algorithm>

#include "tac/model_io.hpp"

namespace tac::testgen {

double unit(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

namespace {

std::vector<double> random_row(std::mt19937_64& rng, int card) {
  std::vector<double> row(card);
  double sum = 0.0;
  for (double& x : row) {
    x = 0.05 + unit(rng);  // bounded away from zero: keeps oracles well-posed
    sum += x;
  }
  for (double& x : row) x /= sum;
  return row;
}

}  // namespace

TbnModel random_model(std::mt19937_64& rng, const ModelOptions& opt) {
  const int n = opt.min_nodes + static_cast<int>(rng() % (opt.max_nodes - opt.min_nodes + 1));

  std::vector<Variable> vars;
  std::vector<int> cards;
  for (int i = 0; i < n; ++i) {
    int card = 2 + static_cast<int>(rng() % (opt.max_states - 1));
    std::vector<std::string> states;
    for (int s = 0; s < card; ++s) states.push_back("s" + std::to_string(s));
    vars.push_back({"V" + std::to_string(i), states});
    cards.push_back(card);
  }

  // parents drawn among lower-indexed nodes
  std::vector<std::vector<VarId>> parents(n);
  for (int i = 1; i < n; ++i) {
    int max_p = std::min<int>({opt.max_parents, i, 3});
    int k = static_cast<int>(rng() % (max_p + 1));
    std::vector<VarId> pool(i);
    for (int j = 0; j < i; ++j) pool[j] = j;
    for (int j = 0; j < k; ++j)
      std::swap(pool[j], pool[j + rng() % (pool.size() - j)]);
    parents[i].assign(pool.begin(), pool.begin() + k);
    std::sort(parents[i].begin(), parents[i].end());
  }

  std::vector<bool> testing(n, false);
  if (opt.max_testing > 0) {
    std::vector<int> non_roots;
    for (int i = 0; i < n; ++i)
      if (!parents[i].empty()) non_roots.push_back(i);
    int want = static_cast<int>(rng() % (opt.max_testing + 1));
    for (int t = 0; t < want && !non_roots.empty(); ++t) {
      size_t pick = rng() % non_roots.size();
      testing[non_roots[pick]] = true;
      non_roots.erase(non_roots.begin() + pick);
    }
  }

  std::vector<Cpt> cpts;
  for (int i = 0; i < n; ++i) {
    int64_t np = 1;
    for (VarId p : parents[i]) np *= cards[p];
    if (testing[i]) {
      std::vector<double> thr(np), pos, neg;
      for (int64_t u = 0; u < np; ++u) {
        thr[u] = unit(rng);
        auto pr = random_row(rng, cards[i]);
        auto nr = random_row(rng, cards[i]);
        pos.insert(pos.end(), pr.begin(), pr.end());
        neg.insert(neg.end(), nr.begin(), nr.end());
      }
      cpts.push_back(testing_cpt(i, parents[i], thr, pos, neg));
    } else {
      std::vector<double> rows;
      for (int64_t u = 0; u < np; ++u) {
        auto r = random_row(rng, cards[i]);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      cpts.push_back(regular_cpt(i, parents[i], rows));
    }
  }

  return TbnModel(std::move(vars), std::move(cpts));
}

Evidence random_evidence(std::mt19937_64& rng, const TbnModel& m, VarId query, int max_vars) {
  Evidence ev;
  std::vector<VarId> pool;
  for (VarId v = 0; v < m.size(); ++v)
    if (v != query) pool.push_back(v);
  int k = pool.empty() ? 0 : 1 + static_cast<int>(rng() % std::min<size_t>(max_vars, pool.size()));
  for (int j = 0; j < k; ++j)
    std::swap(pool[j], pool[j + rng() % (pool.size() - j)]);
  for (int j = 0; j < k; ++j) {
    int card = m.var(pool[j]).card();
    std::vector<double> lam(card);
    double sum = 0.0;
    for (double& x : lam) {
      x = 0.01 + unit(rng);
      sum += x;
    }
    for (double& x : lam) x /= sum;
    ev.likelihoods[pool[j]] = lam;
  }
  return ev;
}

std::vector<VarId> evidence_vars(const Evidence& ev) {
  std::vector<VarId> out;
  for (const auto& [v, lam] : ev.likelihoods) out.push_back(v);
  return out;
}

}  // namespace tac::testgen
