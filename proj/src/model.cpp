#include "tac/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace tac {

int64_t mixed_radix_size(const std::vector<int>& cards) {
  int64_t n = 1;
  for (int c : cards) n *= c;
  return n;
}

int64_t mixed_radix_index(const std::vector<int>& cards, const std::vector<int>& digits) {
  int64_t idx = 0;
  for (size_t i = 0; i < cards.size(); ++i) idx = idx * cards[i] + digits[i];
  return idx;
}

void mixed_radix_decode(const std::vector<int>& cards, int64_t index, std::vector<int>& digits) {
  digits.resize(cards.size());
  for (size_t i = cards.size(); i-- > 0;) {
    digits[i] = static_cast<int>(index % cards[i]);
    index /= cards[i];
  }
}

namespace {

void check_row(std::vector<double>& row_storage, size_t offset, int card,
               const std::string& what, bool auto_renormalize) {
  double sum = 0.0;
  for (int i = 0; i < card; ++i) {
    double p = row_storage[offset + i];
    if (!(p >= 0.0 && p <= 1.0 + kRowSumTol))
      throw ModelError(what + ": entry " + std::to_string(p) + " outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTol) {
    if (auto_renormalize && sum > 0.0) {
      for (int i = 0; i < card; ++i) row_storage[offset + i] /= sum;
    } else {
      std::ostringstream os;
      os << what << ": row sums to " << sum << ", expected 1 (tolerance " << kRowSumTol << ")";
      throw ModelError(os.str());
    }
  }
}

}  // namespace

TbnModel::TbnModel(std::vector<Variable> variables, std::vector<Cpt> cpts,
                   bool auto_renormalize)
    : vars_(std::move(variables)), cpts_(std::move(cpts)) {
  validate(auto_renormalize);
}

void TbnModel::validate(bool auto_renormalize) {
  const size_t n = vars_.size();
  if (cpts_.size() != n)
    throw ModelError("model needs exactly one CPT per variable");

  std::set<std::string> names;
  for (const auto& v : vars_) {
    if (v.card() < 2)
      throw ModelError("variable '" + v.name + "' needs at least 2 states");
    if (!names.insert(v.name).second)
      throw ModelError("duplicate variable name '" + v.name + "'");
    std::set<std::string> st(v.states.begin(), v.states.end());
    if (st.size() != v.states.size())
      throw ModelError("variable '" + v.name + "' has duplicate state labels");
  }

  // cpts_ indexed by child id after this
  std::vector<Cpt> by_child(n);
  std::vector<bool> seen(n, false);
  for (auto& c : cpts_) {
    if (c.child >= n) throw ModelError("CPT child out of range");
    if (seen[c.child])
      throw ModelError("variable '" + vars_[c.child].name + "' has two CPTs");
    seen[c.child] = true;
    by_child[c.child] = std::move(c);
  }
  for (size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ModelError("variable '" + vars_[i].name + "' has no CPT");
  cpts_ = std::move(by_child);

  children_.assign(n, {});
  for (VarId v = 0; v < n; ++v) {
    std::set<VarId> ps;
    for (VarId p : cpts_[v].parents) {
      if (p >= n) throw ModelError("CPT parent out of range");
      if (p == v || !ps.insert(p).second)
        throw ModelError("CPT for '" + vars_[v].name + "' has invalid parent list");
      children_[p].push_back(v);
    }
  }

  // topological order (Kahn); also the acyclicity check
  std::vector<int> indeg(n, 0);
  for (VarId v = 0; v < n; ++v) indeg[v] = static_cast<int>(cpts_[v].parents.size());
  std::vector<VarId> queue;
  for (VarId v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  topo_.clear();
  for (size_t head = 0; head < queue.size(); ++head) {
    VarId v = queue[head];
    topo_.push_back(v);
    for (VarId c : children_[v])
      if (--indeg[c] == 0) queue.push_back(c);
  }
  if (topo_.size() != n) throw ModelError("model graph has a cycle");

  testing_count_ = 0;
  for (VarId v = 0; v < n; ++v) {
    Cpt& c = cpts_[v];
    const int card = vars_[v].card();
    const int64_t np = n_parent_states(v);
    const std::string where = "CPT for '" + vars_[v].name + "'";
    if (c.testing()) {
      ++testing_count_;
      if (c.parents.empty())
        throw ModelError(where + ": root nodes are always regular");
      if ((int64_t)c.thresholds.size() != np)
        throw ModelError(where + ": expected " + std::to_string(np) + " thresholds");
      for (double t : c.thresholds)
        if (!(t >= 0.0 && t <= 1.0))
          throw ModelError(where + ": threshold outside [0,1]");
      if ((int64_t)c.pos_entries.size() != np * card ||
          (int64_t)c.neg_entries.size() != np * card)
        throw ModelError(where + ": testing entry count mismatch");
      for (int64_t u = 0; u < np; ++u) {
        check_row(c.pos_entries, u * card, card, where + ", pos row " + std::to_string(u),
                  auto_renormalize);
        check_row(c.neg_entries, u * card, card, where + ", neg row " + std::to_string(u),
                  auto_renormalize);
      }
    } else {
      if ((int64_t)c.entries.size() != np * card)
        throw ModelError(where + ": expected " + std::to_string(np * card) + " entries, got " +
                         std::to_string(c.entries.size()));
      for (int64_t u = 0; u < np; ++u)
        check_row(c.entries, u * card, card, where + ", row " + std::to_string(u),
                  auto_renormalize);
    }
  }
}

std::optional<VarId> TbnModel::find(const std::string& name) const {
  for (VarId v = 0; v < vars_.size(); ++v)
    if (vars_[v].name == name) return v;
  return std::nullopt;
}

VarId TbnModel::require(const std::string& name) const {
  auto v = find(name);
  if (!v) throw ModelError("unknown variable '" + name + "'");
  return *v;
}

std::vector<VarId> TbnModel::ancestors(VarId v) const {
  std::vector<bool> mark(vars_.size(), false);
  std::vector<VarId> stack(parents(v).begin(), parents(v).end());
  while (!stack.empty()) {
    VarId u = stack.back();
    stack.pop_back();
    if (mark[u]) continue;
    mark[u] = true;
    for (VarId p : parents(u)) stack.push_back(p);
  }
  std::vector<VarId> out;
  for (VarId u = 0; u < vars_.size(); ++u)
    if (mark[u]) out.push_back(u);
  return out;
}

int TbnModel::n_parent_states(VarId v) const {
  int64_t np = 1;
  for (VarId p : cpts_[v].parents) np *= vars_[p].card();
  return static_cast<int>(np);
}

ParamCounts TbnModel::parameter_count() const {
  ParamCounts pc;
  for (VarId v = 0; v < vars_.size(); ++v) {
    const int64_t m = vars_[v].card();
    const int64_t n = n_parent_states(v);
    if (cpts_[v].testing()) {
      pc.dynamic_params += 2 * m * n;
      pc.thresholds += n;
    } else {
      pc.static_params += m * n;
    }
  }
  return pc;
}

TbnModel TbnModel::prune_for_query(VarId query, const std::vector<VarId>& evidence_vars) const {
  std::vector<bool> keep(vars_.size(), true);
  std::vector<bool> pinned(vars_.size(), false);
  if (query >= vars_.size()) throw ModelError("prune: query variable out of range");
  pinned[query] = true;
  for (VarId e : evidence_vars) {
    if (e >= vars_.size()) throw ModelError("prune: evidence variable out of range");
    pinned[e] = true;
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (VarId v = 0; v < vars_.size(); ++v) {
      if (!keep[v] || pinned[v]) continue;
      bool leaf = true;
      for (VarId c : children_[v])
        if (keep[c]) { leaf = false; break; }
      if (leaf) {
        keep[v] = false;
        changed = true;
      }
    }
  }

  std::vector<VarId> remap(vars_.size(), kNoVar);
  std::vector<Variable> nv;
  for (VarId v = 0; v < vars_.size(); ++v) {
    if (!keep[v]) continue;
    remap[v] = static_cast<VarId>(nv.size());
    nv.push_back(vars_[v]);
  }
  std::vector<Cpt> nc;
  for (VarId v = 0; v < vars_.size(); ++v) {
    if (!keep[v]) continue;
    Cpt c = cpts_[v];  // parents of a kept node are always kept
    c.child = remap[v];
    for (auto& p : c.parents) p = remap[p];
    nc.push_back(std::move(c));
  }
  return TbnModel(std::move(nv), std::move(nc));
}

bool TbnModel::structurally_equal(const TbnModel& other) const {
  if (vars_.size() != other.vars_.size()) return false;
  for (VarId v = 0; v < vars_.size(); ++v) {
    if (vars_[v].name != other.vars_[v].name) return false;
    if (vars_[v].states != other.vars_[v].states) return false;
    const Cpt& a = cpts_[v];
    const Cpt& b = other.cpts_[v];
    if (a.kind != b.kind || a.parents != b.parents) return false;
    if (a.entries != b.entries || a.thresholds != b.thresholds ||
        a.pos_entries != b.pos_entries || a.neg_entries != b.neg_entries)
      return false;
  }
  return true;
}

void TbnModel::validate_evidence(const Evidence& ev) const {
  for (const auto& [v, lam] : ev.likelihoods) {
    if (v >= vars_.size()) throw ModelError("evidence on unknown variable");
    if ((int)lam.size() != vars_[v].card())
      throw ModelError("evidence vector on '" + vars_[v].name + "' has wrong length");
    double sum = 0.0;
    for (double l : lam) {
      if (!(l >= 0.0 && l <= 1.0 + kRowSumTol))
        throw ModelError("evidence value outside [0,1] on '" + vars_[v].name + "'");
      sum += l;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw ModelError("evidence on '" + vars_[v].name + "' does not sum to 1");
  }
}

}  // namespace tac
