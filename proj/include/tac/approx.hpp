#pragma once

#include <functional>
#include <vector>

#include "tac/model.hpp"

namespace tac {

struct ApproxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Fn1d = std::function<double(double)>;

// Largest N for which the construction is materialized as a dense TbnModel
// (the output node has N+1 parents, so its CPT grows as N * 2^(N+1)).
// Larger N uses the structured evaluator only.
constexpr int kDenseTbnLimit = 10;

// Theorem-1 construction for a continuous monotone f with f(0)=0, f(1)=1:
// nodes Z, I, Y plus N testing nodes Y_i with thresholds f^{-1}(i/N).
// Evaluating the posterior of y under soft evidence x on Z gives
// floor(N f(x))/N away from the threshold lattice.
class MonotonicApproximator {
 public:
  MonotonicApproximator(int n_steps, std::vector<double> thresholds);

  int n_steps() const { return n_; }
  const std::vector<double>& thresholds() const { return thresholds_; }

  // Posterior of Y=y under soft evidence lambda_z = x, by the TBN selection
  // semantics specialized to this structure (each Y_i selects from the
  // posterior on Z, which equals x under the uniform prior).
  double posterior(double x) const;

  // Literal dense TBN (query "Y", evidence "Z"); n_steps <= kDenseTbnLimit.
  TbnModel to_tbn() const;

 private:
  int n_;
  std::vector<double> thresholds_;  // T_i = f^{-1}(i/N), i = 1..N
};

MonotonicApproximator build_monotonic(const Fn1d& f, int n_steps);

// Appendix-B construction: split f into monotone pieces, approximate each
// with the Theorem-1 block, and copy the active piece's output through a
// threshold-gated chain.
struct MonotonePiece {
  double lo = 0.0, hi = 1.0;
  double f_lo = 0.0, f_hi = 1.0;
  std::vector<double> thresholds;  // in x-space
};

class PiecewiseApproximator {
 public:
  PiecewiseApproximator(std::vector<MonotonePiece> pieces, std::vector<double> borders);

  const std::vector<MonotonePiece>& pieces() const { return pieces_; }
  const std::vector<double>& borders() const { return borders_; }

  double posterior(double x) const;

  // Literal dense TBN (query is the last chain node, evidence "Z"); only
  // for small N per piece and few pieces.
  TbnModel to_tbn() const;

 private:
  double piece_value(const MonotonePiece& p, double x) const;

  std::vector<MonotonePiece> pieces_;
  std::vector<double> borders_;  // size pieces-1
};

// breakpoints: interior x values where the derivative changes sign; empty
// means detect them by a sampled scan at the given step.
PiecewiseApproximator build_piecewise_1d(const Fn1d& f, int n_steps_per_piece,
                                         std::vector<double> breakpoints = {});
std::vector<double> detect_breakpoints(const Fn1d& f, double step = 1e-3);

// Max |posterior(x) - f(x)| over a uniform grid with grid_points samples.
double verify_bound(const std::function<double(double)>& posterior, const Fn1d& f,
                    int grid_points);

}  // namespace tac
