#include <immintrin.h>

#include <cmath>
#include <vector>

#include "tac/batch.hpp"
#include "tac/eval.hpp"

// AVX2 variants of the batch kernels: one 4-wide double vector per node.
// Arithmetic mirrors batch_scalar.cpp exactly (same operation order, no
// FMA), so both backends produce identical bits.

namespace tac {

namespace {

inline __m256d exp4(__m256d x) {
  // exact per-lane libm exp; sigsel nodes are rare enough that this does
  // not dominate, and it keeps the two backends bit-identical
  alignas(32) double t[4];
  _mm256_store_pd(t, x);
  t[0] = std::exp(t[0]);
  t[1] = std::exp(t[1]);
  t[2] = std::exp(t[2]);
  t[3] = std::exp(t[3]);
  return _mm256_load_pd(t);
}

inline __m256d sigsel_tau(__m256d x, __m256d t, double gamma) {
  __m256d d = _mm256_mul_pd(_mm256_set1_pd(-gamma), _mm256_sub_pd(x, t));
  __m256d e = exp4(d);
  return _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_add_pd(_mm256_set1_pd(1.0), e));
}

}  // namespace

void batch_forward_avx2(const Circuit& c, BatchContext& ctx) {
  constexpr int L = BatchContext::kLanes;
  static_assert(L == 4);
  double* v = ctx.values_.data();
  const double* ev = ctx.evidence_.data();
  const double* par = ctx.params_.data();

  for (NodeId id = 0; id < c.node_count(); ++id) {
    const Node& n = c.node(id);
    auto ch = c.children(id);
    double* out = v + (size_t)id * L;
    switch (n.kind) {
      case NodeKind::Const:
        _mm256_storeu_pd(out, _mm256_set1_pd(n.payload));
        break;
      case NodeKind::Param:
        _mm256_storeu_pd(out, _mm256_set1_pd(par[n.aux]));
        break;
      case NodeKind::Evidence:
        _mm256_storeu_pd(out, _mm256_loadu_pd(ev + (size_t)n.aux * L));
        break;
      case NodeKind::Add: {
        __m256d s = _mm256_setzero_pd();
        for (NodeId x : ch) s = _mm256_add_pd(s, _mm256_loadu_pd(v + (size_t)x * L));
        _mm256_storeu_pd(out, s);
        break;
      }
      case NodeKind::Mul: {
        __m256d p = _mm256_set1_pd(1.0);
        for (NodeId x : ch) p = _mm256_mul_pd(p, _mm256_loadu_pd(v + (size_t)x * L));
        _mm256_storeu_pd(out, p);
        break;
      }
      case NodeKind::Div: {
        __m256d num = _mm256_loadu_pd(v + (size_t)ch[0] * L);
        __m256d den = _mm256_loadu_pd(v + (size_t)ch[1] * L);
        __m256d guard = _mm256_set1_pd(kDivGuard);
        __m256d mask = _mm256_cmp_pd(den, guard, _CMP_GT_OQ);
        den = _mm256_blendv_pd(guard, den, mask);
        _mm256_storeu_pd(out, _mm256_div_pd(num, den));
        break;
      }
      case NodeKind::Test: {
        __m256d x = _mm256_loadu_pd(v + (size_t)ch[0] * L);
        __m256d t = _mm256_loadu_pd(v + (size_t)ch[1] * L);
        __m256d pos = _mm256_loadu_pd(v + (size_t)ch[2] * L);
        __m256d neg = _mm256_loadu_pd(v + (size_t)ch[3] * L);
        __m256d mask = _mm256_cmp_pd(x, t, _CMP_GE_OQ);
        _mm256_storeu_pd(out, _mm256_blendv_pd(neg, pos, mask));
        break;
      }
      case NodeKind::Sigsel: {
        __m256d x = _mm256_loadu_pd(v + (size_t)ch[0] * L);
        __m256d t = _mm256_loadu_pd(v + (size_t)ch[1] * L);
        __m256d pos = _mm256_loadu_pd(v + (size_t)ch[2] * L);
        __m256d neg = _mm256_loadu_pd(v + (size_t)ch[3] * L);
        __m256d tau = sigsel_tau(x, t, n.payload);
        __m256d one_m = _mm256_sub_pd(_mm256_set1_pd(1.0), tau);
        _mm256_storeu_pd(out, _mm256_add_pd(_mm256_mul_pd(tau, pos),
                                            _mm256_mul_pd(one_m, neg)));
        break;
      }
    }
  }
}

void batch_backward_avx2(const Circuit& c, BatchContext& ctx) {
  constexpr int L = BatchContext::kLanes;
  const double* v = ctx.values_.data();
  double* a = ctx.adjoints_.data();

  std::fill(ctx.adjoints_.begin(), ctx.adjoints_.end(), 0.0);
  for (size_t k = 0; k < c.outputs().size(); ++k) {
    double* dst = a + (size_t)c.outputs()[k] * L;
    _mm256_storeu_pd(dst, _mm256_add_pd(_mm256_loadu_pd(dst),
                                        _mm256_loadu_pd(ctx.seeds_.data() + k * L)));
  }

  std::vector<double> pre;
  for (NodeId id = static_cast<NodeId>(c.node_count()); id-- > 0;) {
    const Node& n = c.node(id);
    auto ch = c.children(id);
    __m256d g = _mm256_loadu_pd(a + (size_t)id * L);
    switch (n.kind) {
      case NodeKind::Const:
      case NodeKind::Param:
      case NodeKind::Evidence:
        break;
      case NodeKind::Add:
        for (NodeId x : ch) {
          double* dst = a + (size_t)x * L;
          _mm256_storeu_pd(dst, _mm256_add_pd(_mm256_loadu_pd(dst), g));
        }
        break;
      case NodeKind::Mul: {
        const size_t k = ch.size();
        if (k == 2) {
          double* d0 = a + (size_t)ch[0] * L;
          double* d1 = a + (size_t)ch[1] * L;
          __m256d v0 = _mm256_loadu_pd(v + (size_t)ch[0] * L);
          __m256d v1 = _mm256_loadu_pd(v + (size_t)ch[1] * L);
          _mm256_storeu_pd(d0, _mm256_add_pd(_mm256_loadu_pd(d0), _mm256_mul_pd(g, v1)));
          _mm256_storeu_pd(d1, _mm256_add_pd(_mm256_loadu_pd(d1), _mm256_mul_pd(g, v0)));
        } else {
          pre.assign((k + 1) * L, 1.0);
          for (size_t i = 0; i < k; ++i) {
            __m256d p = _mm256_loadu_pd(pre.data() + i * L);
            __m256d x = _mm256_loadu_pd(v + (size_t)ch[i] * L);
            _mm256_storeu_pd(pre.data() + (i + 1) * L, _mm256_mul_pd(p, x));
          }
          __m256d suf = _mm256_set1_pd(1.0);
          for (size_t i = k; i-- > 0;) {
            double* dst = a + (size_t)ch[i] * L;
            __m256d p = _mm256_loadu_pd(pre.data() + i * L);
            __m256d contrib = _mm256_mul_pd(_mm256_mul_pd(g, p), suf);
            _mm256_storeu_pd(dst, _mm256_add_pd(_mm256_loadu_pd(dst), contrib));
            suf = _mm256_mul_pd(suf, _mm256_loadu_pd(v + (size_t)ch[i] * L));
          }
        }
        break;
      }
      case NodeKind::Div: {
        // branch per lane (guard region treats the denominator as constant)
        for (int l = 0; l < L; ++l) {
          double gl = a[(size_t)id * L + l];
          double den = v[(size_t)ch[1] * L + l];
          if (den > kDivGuard) {
            a[(size_t)ch[0] * L + l] += gl / den;
            a[(size_t)ch[1] * L + l] -= gl * v[(size_t)ch[0] * L + l] / (den * den);
          } else {
            a[(size_t)ch[0] * L + l] += gl / kDivGuard;
          }
        }
        break;
      }
      case NodeKind::Test: {
        for (int l = 0; l < L; ++l) {
          NodeId sel = v[(size_t)ch[0] * L + l] >= v[(size_t)ch[1] * L + l] ? ch[2] : ch[3];
          a[(size_t)sel * L + l] += a[(size_t)id * L + l];
        }
        break;
      }
      case NodeKind::Sigsel: {
        __m256d x = _mm256_loadu_pd(v + (size_t)ch[0] * L);
        __m256d t = _mm256_loadu_pd(v + (size_t)ch[1] * L);
        __m256d pos = _mm256_loadu_pd(v + (size_t)ch[2] * L);
        __m256d neg = _mm256_loadu_pd(v + (size_t)ch[3] * L);
        __m256d tau = sigsel_tau(x, t, n.payload);
        __m256d one = _mm256_set1_pd(1.0);
        // association matches batch_scalar: ((gamma*tau)*(1-tau))*(pos-neg)
        __m256d dtau = _mm256_mul_pd(
            _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(n.payload), tau),
                          _mm256_sub_pd(one, tau)),
            _mm256_sub_pd(pos, neg));
        double* dx = a + (size_t)ch[0] * L;
        double* dt = a + (size_t)ch[1] * L;
        double* dp = a + (size_t)ch[2] * L;
        double* dn = a + (size_t)ch[3] * L;
        __m256d gd = _mm256_mul_pd(g, dtau);
        _mm256_storeu_pd(dx, _mm256_add_pd(_mm256_loadu_pd(dx), gd));
        _mm256_storeu_pd(dt, _mm256_sub_pd(_mm256_loadu_pd(dt), gd));
        _mm256_storeu_pd(dp, _mm256_add_pd(_mm256_loadu_pd(dp), _mm256_mul_pd(g, tau)));
        _mm256_storeu_pd(dn, _mm256_add_pd(_mm256_loadu_pd(dn),
                                           _mm256_mul_pd(g, _mm256_sub_pd(one, tau))));
        break;
      }
    }
  }
}

}  // namespace tac
