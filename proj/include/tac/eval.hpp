#pragma once

#include <span>
#include <vector>

#include "tac/circuit.hpp"

namespace tac {

// Guard for divisions by a (near-)zero normalizer.
constexpr double kDivGuard = 1e-300;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalResult {
  std::vector<double> outputs;    // P*(q_1..q_k)
  std::vector<double> posterior;  // outputs / sum(outputs)
  bool inconsistent = false;      // sum(outputs) == 0
};

// Per-execution state: bindings plus value/adjoint buffers. One context per
// thread; the circuit itself is shared and immutable.
class EvalContext {
 public:
  explicit EvalContext(const Circuit& c);

  void set_param(size_t index, double v) { param_values_[index] = v; }
  void set_param(const std::string& name, double v);
  double param(size_t index) const { return param_values_[index]; }
  std::vector<double>& param_values() { return param_values_; }

  // Binds the full likelihood vector of one evidence variable. With
  // `strict`, the vector must sum to 1 within kRowSumTol.
  void bind_evidence(const std::string& var, const std::vector<double>& lambda,
                     bool strict = true);
  // Binary shorthand: binds (x, 1-x).
  void bind_evidence(const std::string& var, double x, bool strict = true);
  void clear_evidence();

  const Circuit& circuit() const { return *circuit_; }

  std::vector<double> values;
  std::vector<double> adjoints;

 private:
  friend EvalResult evaluate(EvalContext&);
  friend void gradient(EvalContext&, std::span<const double>);

  const Circuit* circuit_;
  std::vector<double> param_values_;
  std::vector<double> evidence_values_;
  std::vector<bool> evidence_bound_;
};

// Forward pass in topological order. Throws EvalError on unbound evidence.
// A zero output sum is reported via `inconsistent`, not an exception.
EvalResult evaluate(EvalContext& ctx);

// Reverse pass; requires evaluate() to have run on this context. Seeds the
// output nodes with `output_adjoints` and fills ctx.adjoints for every node.
// Test nodes route their adjoint to the selected branch only (x and t get
// zero); sigsel differentiates through the selection weight.
void gradient(EvalContext& ctx, std::span<const double> output_adjoints);

// Adjoint helpers over a finished gradient pass.
double param_adjoint(const EvalContext& ctx, size_t param_index);
double evidence_adjoint(const EvalContext& ctx, size_t slot_index);

// Seeds d(posterior[target])/d(outputs) for gradient(); used wherever a
// normalized output is differentiated. Returns false when sum == 0.
bool posterior_adjoints(std::span<const double> outputs, size_t target,
                        double upstream, std::vector<double>& out_adjoints);

}  // namespace tac
