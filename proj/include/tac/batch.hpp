#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tac/circuit.hpp"

namespace tac {

// Batched circuit execution: kLanes examples evaluated per pass. Parameters
// are lane-uniform; evidence varies per lane. Used by the trainer and the
// grid evaluators, where the per-example scalar path would dominate.
//
// Kernels come in a scalar reference flavor and an AVX2 flavor selected at
// runtime. Both use identical operation order (and no FMA contraction), so
// their results agree to the last bit on the same input.
class BatchContext {
 public:
  static constexpr int kLanes = 4;

  explicit BatchContext(const Circuit& c);

  const Circuit& circuit() const { return *circuit_; }

  void set_params(const std::vector<double>& by_param_index);
  void set_lane_evidence(int lane, uint32_t slot, double v) {
    evidence_[slot * kLanes + lane] = v;
  }

  double value(NodeId node, int lane) const { return values_[node * kLanes + lane]; }
  double adjoint(NodeId node, int lane) const { return adjoints_[node * kLanes + lane]; }
  double output(size_t k, int lane) const {
    return values_[circuit_->outputs()[k] * kLanes + lane];
  }

  // output_adjoints is laid out [output_index * kLanes + lane].
  void seed_output_adjoints(const std::vector<double>& output_adjoints);

  // raw buffers for the kernels
  std::vector<double> values_;    // node-major, stride kLanes
  std::vector<double> adjoints_;  // node-major, stride kLanes
  std::vector<double> params_;    // per param index (uniform)
  std::vector<double> evidence_;  // slot-major, stride kLanes
  std::vector<double> seeds_;     // per output, stride kLanes

 private:
  const Circuit* circuit_;
};

enum class Backend : uint8_t { Scalar, Avx2 };

const char* backend_name(Backend b);

// Picks AVX2 when the CPU and build support it; TAC_FORCE_SCALAR=1 in the
// environment forces the scalar path.
Backend select_backend();
bool backend_available(Backend b);

void batch_forward(const Circuit& c, BatchContext& ctx, Backend backend);
// Requires a matching batch_forward on the same context. Seeds come from
// ctx.seeds_ (see seed_output_adjoints).
void batch_backward(const Circuit& c, BatchContext& ctx, Backend backend);

// kernel entry points (exposed for the equivalence tests)
void batch_forward_scalar(const Circuit& c, BatchContext& ctx);
void batch_backward_scalar(const Circuit& c, BatchContext& ctx);
#ifdef TAC_HAVE_AVX2_TU
void batch_forward_avx2(const Circuit& c, BatchContext& ctx);
void batch_backward_avx2(const Circuit& c, BatchContext& ctx);
#endif

}  // namespace tac
