#include "tac/eval.hpp"

#include <cmath>

#include "tac/model.hpp"

namespace tac {

EvalContext::EvalContext(const Circuit& c) : circuit_(&c) {
  values.assign(c.node_count(), 0.0);
  adjoints.assign(c.node_count(), 0.0);
  param_values_.resize(c.params().size());
  for (size_t i = 0; i < c.params().size(); ++i) param_values_[i] = c.params()[i].init;
  evidence_values_.assign(c.evidence_slots().size(), 0.0);
  evidence_bound_.assign(c.evidence_slots().size(), false);
}

void EvalContext::set_param(const std::string& name, double v) {
  int idx = circuit_->param_index(name);
  if (idx < 0) throw EvalError("unknown parameter '" + name + "'");
  param_values_[idx] = v;
}

void EvalContext::bind_evidence(const std::string& var, const std::vector<double>& lambda,
                                bool strict) {
  auto it = circuit_->evidence_vars().find(var);
  if (it == circuit_->evidence_vars().end())
    throw EvalError("no evidence slots for variable '" + var + "'");
  const auto& slots = it->second;
  if (lambda.size() != slots.size())
    throw EvalError("evidence vector for '" + var + "' needs " +
                    std::to_string(slots.size()) + " entries");
  if (strict) {
    double sum = 0.0;
    for (double l : lambda) {
      if (!(l >= 0.0 && l <= 1.0 + kRowSumTol))
        throw EvalError("evidence value outside [0,1] for '" + var + "'");
      sum += l;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw EvalError("evidence on '" + var + "' does not sum to 1");
  }
  for (size_t s = 0; s < slots.size(); ++s) {
    if (slots[s] == Circuit::kNoSlot) continue;
    evidence_values_[slots[s]] = lambda[s];
    evidence_bound_[slots[s]] = true;
  }
}

void EvalContext::bind_evidence(const std::string& var, double x, bool strict) {
  bind_evidence(var, std::vector<double>{x, 1.0 - x}, strict);
}

void EvalContext::clear_evidence() {
  evidence_bound_.assign(evidence_bound_.size(), false);
}

EvalResult evaluate(EvalContext& ctx) {
  const Circuit& c = ctx.circuit();
  for (size_t i = 0; i < ctx.evidence_bound_.size(); ++i)
    if (!ctx.evidence_bound_[i])
      throw EvalError("unbound evidence slot for variable '" +
                      c.evidence_slots()[i].var + "'");

  auto& v = ctx.values;
  for (NodeId id = 0; id < c.node_count(); ++id) {
    const Node& n = c.node(id);
    auto ch = c.children(id);
    switch (n.kind) {
      case NodeKind::Const:
        v[id] = n.payload;
        break;
      case NodeKind::Param:
        v[id] = ctx.param_values_[n.aux];
        break;
      case NodeKind::Evidence:
        v[id] = ctx.evidence_values_[n.aux];
        break;
      case NodeKind::Add: {
        double s = 0.0;
        for (NodeId x : ch) s += v[x];
        v[id] = s;
        break;
      }
      case NodeKind::Mul: {
        double p = 1.0;
        for (NodeId x : ch) p *= v[x];
        v[id] = p;
        break;
      }
      case NodeKind::Div: {
        double den = v[ch[1]];
        v[id] = v[ch[0]] / (den > kDivGuard ? den : kDivGuard);
        break;
      }
      case NodeKind::Test:
        v[id] = v[ch[0]] >= v[ch[1]] ? v[ch[2]] : v[ch[3]];
        break;
      case NodeKind::Sigsel: {
        double tau = 1.0 / (1.0 + std::exp(-n.payload * (v[ch[0]] - v[ch[1]])));
        v[id] = tau * v[ch[2]] + (1.0 - tau) * v[ch[3]];
        break;
      }
    }
  }

  EvalResult r;
  double sum = 0.0;
  for (NodeId o : c.outputs()) {
    r.outputs.push_back(v[o]);
    sum += v[o];
  }
  if (sum > 0.0) {
    for (double x : r.outputs) r.posterior.push_back(x / sum);
  } else {
    r.inconsistent = true;
    r.posterior.assign(r.outputs.size(), 0.0);
  }
  return r;
}

void gradient(EvalContext& ctx, std::span<const double> output_adjoints) {
  const Circuit& c = ctx.circuit();
  if (output_adjoints.size() != c.outputs().size())
    throw EvalError("need one output adjoint per output node");

  auto& v = ctx.values;
  auto& a = ctx.adjoints;
  a.assign(c.node_count(), 0.0);
  for (size_t i = 0; i < c.outputs().size(); ++i) a[c.outputs()[i]] += output_adjoints[i];

  for (NodeId id = static_cast<NodeId>(c.node_count()); id-- > 0;) {
    const double g = a[id];
    if (g == 0.0) continue;
    const Node& n = c.node(id);
    auto ch = c.children(id);
    switch (n.kind) {
      case NodeKind::Const:
      case NodeKind::Param:
      case NodeKind::Evidence:
        break;
      case NodeKind::Add:
        for (NodeId x : ch) a[x] += g;
        break;
      case NodeKind::Mul: {
        // prefix/suffix products so zero-valued children differentiate right
        const size_t k = ch.size();
        if (k == 2) {
          a[ch[0]] += g * v[ch[1]];
          a[ch[1]] += g * v[ch[0]];
        } else {
          std::vector<double> pre(k + 1, 1.0);
          for (size_t i = 0; i < k; ++i) pre[i + 1] = pre[i] * v[ch[i]];
          double suf = 1.0;
          for (size_t i = k; i-- > 0;) {
            a[ch[i]] += g * pre[i] * suf;
            suf *= v[ch[i]];
          }
        }
        break;
      }
      case NodeKind::Div: {
        double den = v[ch[1]];
        if (den > kDivGuard) {
          a[ch[0]] += g / den;
          a[ch[1]] -= g * v[ch[0]] / (den * den);
        } else {
          a[ch[0]] += g / kDivGuard;  // denominator clamped: constant wrt ch[1]
        }
        break;
      }
      case NodeKind::Test:
        a[v[ch[0]] >= v[ch[1]] ? ch[2] : ch[3]] += g;
        break;
      case NodeKind::Sigsel: {
        double tau = 1.0 / (1.0 + std::exp(-n.payload * (v[ch[0]] - v[ch[1]])));
        double dtau = n.payload * tau * (1.0 - tau) * (v[ch[2]] - v[ch[3]]);
        a[ch[0]] += g * dtau;
        a[ch[1]] -= g * dtau;
        a[ch[2]] += g * tau;
        a[ch[3]] += g * (1.0 - tau);
        break;
      }
    }
  }
}

double param_adjoint(const EvalContext& ctx, size_t param_index) {
  return ctx.adjoints[ctx.circuit().params()[param_index].node];
}

double evidence_adjoint(const EvalContext& ctx, size_t slot_index) {
  return ctx.adjoints[ctx.circuit().evidence_slots()[slot_index].node];
}

bool posterior_adjoints(std::span<const double> outputs, size_t target, double upstream,
                        std::vector<double>& out_adjoints) {
  double sum = 0.0;
  for (double x : outputs) sum += x;
  out_adjoints.assign(outputs.size(), 0.0);
  if (!(sum > 0.0)) return false;
  for (size_t j = 0; j < outputs.size(); ++j) {
    double d = (j == target) ? (sum - outputs[target]) / (sum * sum)
                             : -outputs[target] / (sum * sum);
    out_adjoints[j] = upstream * d;
  }
  return true;
}

}  // namespace tac
