#include "tac/compiler.hpp"

#include <algorithm>

namespace tac {

namespace {

std::string instantiation_label(const TbnModel& m, const std::vector<VarId>& parents,
                                const std::vector<int>& digits) {
  std::string s;
  for (size_t i = 0; i < parents.size(); ++i) {
    if (i) s += ",";
    s += m.var(parents[i]).name + "=" + m.var(parents[i]).states[digits[i]];
  }
  return s;
}

}  // namespace

std::string param_name(const TbnModel& m, VarId v, int64_t u, int state, char polarity) {
  const Cpt& c = m.cpt(v);
  std::vector<int> pcards, digits;
  for (VarId p : c.parents) pcards.push_back(m.var(p).card());
  mixed_radix_decode(pcards, u, digits);
  std::string head = "p";
  if (polarity == '+') head = "p+";
  if (polarity == '-') head = "p-";
  std::string s = head + "(" + m.var(v).name + "=" + m.var(v).states[state];
  if (!c.parents.empty()) s += "|" + instantiation_label(m, c.parents, digits);
  return s + ")";
}

std::string threshold_name(const TbnModel& m, VarId v, int64_t u) {
  const Cpt& c = m.cpt(v);
  std::vector<int> pcards, digits;
  for (VarId p : c.parents) pcards.push_back(m.var(p).card());
  mixed_radix_decode(pcards, u, digits);
  return "T(" + m.var(v).name + "|" + instantiation_label(m, c.parents, digits) + ")";
}

std::string QueryCompiler::row_label(VarId v, int64_t u) const {
  const Cpt& c = model_.cpt(v);
  std::vector<int> pcards, digits;
  for (VarId p : c.parents) pcards.push_back(model_.var(p).card());
  mixed_radix_decode(pcards, u, digits);
  std::string s = model_.var(v).name;
  if (!c.parents.empty()) s += "|" + instantiation_label(model_, c.parents, digits);
  return s;
}

QueryCompiler::QueryCompiler(const TbnModel& model, const CompileRequest& req)
    : req_(req), builder_(req.dedup) {
  if (req.query >= model.size()) throw CompileError("compile: query out of range");
  for (VarId e : req.evidence_vars) {
    if (e >= model.size()) throw CompileError("compile: evidence var out of range");
    if (e == req.query) throw CompileError("compile: query must not be an evidence variable");
  }
  if (req.mode == SelectionMode::Sigmoid && !(req.gamma > 0.0))
    throw CompileError("compile: sigmoid mode needs gamma > 0");

  if (req.prune) {
    const std::string qname = model.var(req.query).name;
    std::vector<std::string> enames;
    for (VarId e : req.evidence_vars) enames.push_back(model.var(e).name);
    model_ = model.prune_for_query(req.query, req.evidence_vars);
    req_.query = model_.require(qname);
    req_.evidence_vars.clear();
    for (const auto& n : enames) req_.evidence_vars.push_back(model_.require(n));
  } else {
    model_ = model;
  }
  per_var_.resize(model_.size());
}

void QueryCompiler::init_leaves() {
  if (leaves_done_) return;
  for (VarId v = 0; v < model_.size(); ++v) {
    const Cpt& c = model_.cpt(v);
    const int card = model_.var(v).card();
    const int64_t np = model_.n_parent_states(v);
    PerVar& pv = per_var_[v];
    if (!c.testing()) {
      std::vector<NodeId> entries(np * card);
      for (int64_t u = 0; u < np; ++u)
        for (int x = 0; x < card; ++x)
          entries[u * card + x] =
              builder_.param(param_name(model_, v, u, x, ' '), c.entries[u * card + x],
                             true, ParamRole::Prob, "p(" + row_label(v, u) + ")", x, card);
      pv.factor = make_regular_factor(v, entries);
      pv.has_factor = true;
    } else {
      pv.thresholds.resize(np);
      pv.pos.resize(np * card);
      pv.neg.resize(np * card);
      for (int64_t u = 0; u < np; ++u) {
        pv.thresholds[u] =
            builder_.param(threshold_name(model_, v, u), c.thresholds[u], true,
                           ParamRole::Threshold, threshold_name(model_, v, u), 0, 1);
        for (int x = 0; x < card; ++x) {
          pv.pos[u * card + x] =
              builder_.param(param_name(model_, v, u, x, '+'), c.pos_entries[u * card + x],
                             true, ParamRole::PosProb, "p+(" + row_label(v, u) + ")", x, card);
          pv.neg[u * card + x] =
              builder_.param(param_name(model_, v, u, x, '-'), c.neg_entries[u * card + x],
                             true, ParamRole::NegProb, "p-(" + row_label(v, u) + ")", x, card);
        }
      }
    }
  }
  leaves_done_ = true;
}

Factor<NodeId> QueryCompiler::make_regular_factor(VarId v, const std::vector<NodeId>& entries) {
  const Cpt& c = model_.cpt(v);
  const int card = model_.var(v).card();

  Factor<NodeId> f;
  f.scope = c.parents;
  f.scope.push_back(v);
  std::sort(f.scope.begin(), f.scope.end());
  for (VarId s : f.scope) f.cards.push_back(model_.var(s).card());
  f.cells.resize(mixed_radix_size(f.cards));

  std::vector<int> pcards;
  for (VarId p : c.parents) pcards.push_back(model_.var(p).card());

  std::vector<int> digits;
  for (int64_t idx = 0; idx < f.size(); ++idx) {
    mixed_radix_decode(f.cards, idx, digits);
    std::vector<int> udigits(c.parents.size());
    int x = 0;
    for (size_t s = 0; s < f.scope.size(); ++s) {
      if (f.scope[s] == v) {
        x = digits[s];
        continue;
      }
      for (size_t pi = 0; pi < c.parents.size(); ++pi)
        if (c.parents[pi] == f.scope[s]) udigits[pi] = digits[s];
    }
    const int64_t u = mixed_radix_index(pcards, udigits);
    f.cells[idx] = entries[u * card + x];
  }
  return f;
}

void QueryCompiler::enter_evidence() {
  init_leaves();
  if (evidence_done_) return;
  for (VarId e : req_.evidence_vars) {
    const int card = model_.var(e).card();
    PerVar& pv = per_var_[e];
    pv.lambdas.resize(card);
    for (int x = 0; x < card; ++x)
      pv.lambdas[x] = builder_.evidence(model_.var(e).name, x, card);

    if (pv.has_factor) {
      // wrap every cell for state x_i in mul(lambda_i, cell)
      Factor<NodeId>& f = pv.factor;
      const int64_t stride = f.stride_of(e);
      std::vector<int> digits;
      for (int64_t idx = 0; idx < f.size(); ++idx) {
        int x = static_cast<int>((idx / stride) % card);
        f.cells[idx] = builder_.mul2(pv.lambdas[x], f.cells[idx]);
      }
    } else {
      // testing CPT: selection must not see the node's own evidence, so it
      // is applied to the flattened cells later
      pv.pending_lambda = pv.lambdas;
    }
  }
  evidence_done_ = true;
}

void QueryCompiler::flatten_testing(VarId x) {
  if (!model_.is_testing(x)) throw CompileError("flatten: variable is not testing");
  PerVar& pv = per_var_[x];
  if (pv.has_factor) throw CompileError("flatten: already flattened");

  const Cpt& c = model_.cpt(x);
  if (c.parents.empty()) throw CompileError("flatten: testing root");

  std::vector<VarId> anc = model_.ancestors(x);
  for (VarId a : anc)
    if (!per_var_[a].has_factor)
      throw CompileError("flatten: ancestor '" + model_.var(a).name +
                         "' not flattened yet (visit ancestors first)");

  // unnormalized marginal on the parents given evidence on the ancestors
  std::vector<Factor<NodeId>> factors;
  std::vector<std::vector<VarId>> scopes;
  for (VarId a : anc) {
    factors.push_back(per_var_[a].factor);
    scopes.push_back(per_var_[a].factor.scope);
  }
  std::vector<VarId> keep = c.parents;
  std::sort(keep.begin(), keep.end());
  auto name = [this](VarId v) { return model_.var(v).name; };
  EliminationPlan plan = make_plan(scopes, -1, keep, name);
  SymbolicOps ops{&builder_};
  Factor<NodeId> marg = eliminate_all_except(std::move(factors), plan, keep, ops);

  // n = sum over parent states; the per-row node n_u stays shared across
  // the rows of one parent state
  NodeId n = builder_.add(marg.cells);

  const int card = model_.var(x).card();
  std::vector<int> pcards;
  for (VarId p : c.parents) pcards.push_back(model_.var(p).card());

  Factor<NodeId> flat;
  flat.scope = keep;
  flat.scope.push_back(x);
  std::sort(flat.scope.begin(), flat.scope.end());
  for (VarId s : flat.scope) flat.cards.push_back(model_.var(s).card());
  flat.cells.resize(mixed_radix_size(flat.cards));

  std::vector<int64_t> marg_strides(c.parents.size());
  for (size_t pi = 0; pi < c.parents.size(); ++pi)
    marg_strides[pi] = marg.stride_of(c.parents[pi]);

  std::vector<int> digits;
  for (int64_t idx = 0; idx < flat.size(); ++idx) {
    mixed_radix_decode(flat.cards, idx, digits);
    std::vector<int> udigits(c.parents.size());
    int xs = 0;
    for (size_t s = 0; s < flat.scope.size(); ++s) {
      if (flat.scope[s] == x) {
        xs = digits[s];
        continue;
      }
      for (size_t pi = 0; pi < c.parents.size(); ++pi)
        if (c.parents[pi] == flat.scope[s]) udigits[pi] = digits[s];
    }
    const int64_t u = mixed_radix_index(pcards, udigits);
    int64_t mi = 0;
    for (size_t pi = 0; pi < c.parents.size(); ++pi) mi += udigits[pi] * marg_strides[pi];

    const NodeId n_u = marg.cells[mi];
    NodeId cell;
    if (req_.mode == SelectionMode::Threshold) {
      // Appendix-C.3 node shape: test(n_u, n * T, pos, neg); the posterior
      // comparison n_u/n >= T is done unnormalized.
      cell = builder_.test(n_u, builder_.mul2(pv.thresholds[u], n),
                           pv.pos[u * card + xs], pv.neg[u * card + xs]);
    } else {
      NodeId ratio = builder_.div(n_u, n);
      cell = builder_.sigsel(ratio, pv.thresholds[u], pv.pos[u * card + xs],
                             pv.neg[u * card + xs], req_.gamma);
    }
    if (!pv.pending_lambda.empty()) cell = builder_.mul2(pv.pending_lambda[xs], cell);
    flat.cells[idx] = cell;
  }

  pv.factor = std::move(flat);
  pv.has_factor = true;
}

void QueryCompiler::run_selection() {
  enter_evidence();
  if (selection_done_) return;
  for (VarId v : model_.topo_order())
    if (model_.is_testing(v)) flatten_testing(v);
  selection_done_ = true;
}

Factor<NodeId> QueryCompiler::run_inference() {
  run_selection();

  std::vector<Factor<NodeId>> factors;
  std::vector<std::vector<VarId>> scopes;
  int root = -1;
  for (VarId v = 0; v < model_.size(); ++v) {
    if (v == req_.query) root = static_cast<int>(factors.size());
    factors.push_back(per_var_[v].factor);
    scopes.push_back(per_var_[v].factor.scope);
  }
  std::vector<VarId> keep{req_.query};
  auto name = [this](VarId v) { return model_.var(v).name; };
  EliminationPlan plan = make_plan(scopes, root, keep, name);
  SymbolicOps ops{&builder_};
  return eliminate_all_except(std::move(factors), plan, keep, ops);
}

Circuit QueryCompiler::compile() {
  Factor<NodeId> result = run_inference();
  return builder_.finish(result.cells, model_.var(req_.query).name,
                         model_.var(req_.query).states);
}

const Factor<NodeId>& QueryCompiler::cpt_factor(VarId v) const {
  if (!per_var_[v].has_factor)
    throw CompileError("cpt_factor: no factor yet for '" + model_.var(v).name + "'");
  return per_var_[v].factor;
}

NodeId QueryCompiler::threshold_leaf(VarId v, int parent_state) const {
  return per_var_[v].thresholds.at(parent_state);
}

NodeId QueryCompiler::lambda_leaf(VarId v, int state) const {
  return per_var_[v].lambdas.at(state);
}

Circuit compile_query(const TbnModel& model, const CompileRequest& req) {
  QueryCompiler qc(model, req);
  return qc.compile();
}

}  // namespace tac
