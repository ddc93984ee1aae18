#include <cmath>
#include <vector>

#include "tac/batch.hpp"
#include "tac/eval.hpp"

namespace tac {

// Reference batch kernels. The AVX2 kernels mirror these loops operation
// for operation; keep the evaluation order in sync between the two files.

void batch_forward_scalar(const Circuit& c, BatchContext& ctx) {
  constexpr int L = BatchContext::kLanes;
  double* v = ctx.values_.data();
  const double* ev = ctx.evidence_.data();
  const double* par = ctx.params_.data();

  for (NodeId id = 0; id < c.node_count(); ++id) {
    const Node& n = c.node(id);
    auto ch = c.children(id);
    double* out = v + (size_t)id * L;
    switch (n.kind) {
      case NodeKind::Const:
        for (int l = 0; l < L; ++l) out[l] = n.payload;
        break;
      case NodeKind::Param:
        for (int l = 0; l < L; ++l) out[l] = par[n.aux];
        break;
      case NodeKind::Evidence:
        for (int l = 0; l < L; ++l) out[l] = ev[(size_t)n.aux * L + l];
        break;
      case NodeKind::Add:
        for (int l = 0; l < L; ++l) {
          double s = 0.0;
          for (NodeId x : ch) s += v[(size_t)x * L + l];
          out[l] = s;
        }
        break;
      case NodeKind::Mul:
        for (int l = 0; l < L; ++l) {
          double p = 1.0;
          for (NodeId x : ch) p *= v[(size_t)x * L + l];
          out[l] = p;
        }
        break;
      case NodeKind::Div:
        for (int l = 0; l < L; ++l) {
          double den = v[(size_t)ch[1] * L + l];
          out[l] = v[(size_t)ch[0] * L + l] / (den > kDivGuard ? den : kDivGuard);
        }
        break;
      case NodeKind::Test:
        for (int l = 0; l < L; ++l)
          out[l] = v[(size_t)ch[0] * L + l] >= v[(size_t)ch[1] * L + l]
                       ? v[(size_t)ch[2] * L + l]
                       : v[(size_t)ch[3] * L + l];
        break;
      case NodeKind::Sigsel:
        for (int l = 0; l < L; ++l) {
          double tau = 1.0 / (1.0 + std::exp(-n.payload * (v[(size_t)ch[0] * L + l] -
                                                           v[(size_t)ch[1] * L + l])));
          out[l] = tau * v[(size_t)ch[2] * L + l] + (1.0 - tau) * v[(size_t)ch[3] * L + l];
        }
        break;
    }
  }
}

void batch_backward_scalar(const Circuit& c, BatchContext& ctx) {
  constexpr int L = BatchContext::kLanes;
  const double* v = ctx.values_.data();
  double* a = ctx.adjoints_.data();

  std::fill(ctx.adjoints_.begin(), ctx.adjoints_.end(), 0.0);
  for (size_t k = 0; k < c.outputs().size(); ++k)
    for (int l = 0; l < L; ++l)
      a[(size_t)c.outputs()[k] * L + l] += ctx.seeds_[k * L + l];

  std::vector<double> pre;
  for (NodeId id = static_cast<NodeId>(c.node_count()); id-- > 0;) {
    const Node& n = c.node(id);
    auto ch = c.children(id);
    const double* g = a + (size_t)id * L;
    switch (n.kind) {
      case NodeKind::Const:
      case NodeKind::Param:
      case NodeKind::Evidence:
        break;
      case NodeKind::Add:
        for (NodeId x : ch)
          for (int l = 0; l < L; ++l) a[(size_t)x * L + l] += g[l];
        break;
      case NodeKind::Mul: {
        const size_t k = ch.size();
        if (k == 2) {
          for (int l = 0; l < L; ++l) {
            a[(size_t)ch[0] * L + l] += g[l] * v[(size_t)ch[1] * L + l];
            a[(size_t)ch[1] * L + l] += g[l] * v[(size_t)ch[0] * L + l];
          }
        } else {
          pre.assign((k + 1) * L, 1.0);
          for (size_t i = 0; i < k; ++i)
            for (int l = 0; l < L; ++l)
              pre[(i + 1) * L + l] = pre[i * L + l] * v[(size_t)ch[i] * L + l];
          double suf[L] = {1.0, 1.0, 1.0, 1.0};
          for (size_t i = k; i-- > 0;) {
            for (int l = 0; l < L; ++l) {
              a[(size_t)ch[i] * L + l] += g[l] * pre[i * L + l] * suf[l];
              suf[l] *= v[(size_t)ch[i] * L + l];
            }
          }
        }
        break;
      }
      case NodeKind::Div:
        for (int l = 0; l < L; ++l) {
          double den = v[(size_t)ch[1] * L + l];
          if (den > kDivGuard) {
            a[(size_t)ch[0] * L + l] += g[l] / den;
            a[(size_t)ch[1] * L + l] -= g[l] * v[(size_t)ch[0] * L + l] / (den * den);
          } else {
            a[(size_t)ch[0] * L + l] += g[l] / kDivGuard;
          }
        }
        break;
      case NodeKind::Test:
        for (int l = 0; l < L; ++l) {
          NodeId sel = v[(size_t)ch[0] * L + l] >= v[(size_t)ch[1] * L + l] ? ch[2] : ch[3];
          a[(size_t)sel * L + l] += g[l];
        }
        break;
      case NodeKind::Sigsel:
        for (int l = 0; l < L; ++l) {
          double tau = 1.0 / (1.0 + std::exp(-n.payload * (v[(size_t)ch[0] * L + l] -
                                                           v[(size_t)ch[1] * L + l])));
          double dtau = n.payload * tau * (1.0 - tau) *
                        (v[(size_t)ch[2] * L + l] - v[(size_t)ch[3] * L + l]);
          a[(size_t)ch[0] * L + l] += g[l] * dtau;
          a[(size_t)ch[1] * L + l] -= g[l] * dtau;
          a[(size_t)ch[2] * L + l] += g[l] * tau;
          a[(size_t)ch[3] * L + l] += g[l] * (1.0 - tau);
        }
        break;
    }
  }
}

}  // namespace tac
