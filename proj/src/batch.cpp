#include "tac/batch.hpp"

#include <cstdlib>
#include <stdexcept>

namespace tac {

BatchContext::BatchContext(const Circuit& c) : circuit_(&c) {
  values_.assign(c.node_count() * kLanes, 0.0);
  adjoints_.assign(c.node_count() * kLanes, 0.0);
  params_.resize(c.params().size());
  for (size_t i = 0; i < c.params().size(); ++i) params_[i] = c.params()[i].init;
  evidence_.assign(c.evidence_slots().size() * kLanes, 0.0);
  seeds_.assign(c.outputs().size() * kLanes, 0.0);
}

void BatchContext::set_params(const std::vector<double>& by_param_index) {
  if (by_param_index.size() != params_.size())
    throw std::runtime_error("batch: wrong parameter vector length");
  params_ = by_param_index;
}

void BatchContext::seed_output_adjoints(const std::vector<double>& output_adjoints) {
  if (output_adjoints.size() != seeds_.size())
    throw std::runtime_error("batch: wrong output adjoint length");
  seeds_ = output_adjoints;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
#if defined(TAC_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend select_backend() {
  const char* force = std::getenv("TAC_FORCE_SCALAR");
  if (force && force[0] == '1') return Backend::Scalar;
  return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

void batch_forward(const Circuit& c, BatchContext& ctx, Backend backend) {
#ifdef TAC_HAVE_AVX2_TU
  if (backend == Backend::Avx2) {
    batch_forward_avx2(c, ctx);
    return;
  }
#endif
  (void)backend;
  batch_forward_scalar(c, ctx);
}

void batch_backward(const Circuit& c, BatchContext& ctx, Backend backend) {
#ifdef TAC_HAVE_AVX2_TU
  if (backend == Backend::Avx2) {
    batch_backward_avx2(c, ctx);
    return;
  }
#endif
  (void)backend;
  batch_backward_scalar(c, ctx);
}

}  // namespace tac
