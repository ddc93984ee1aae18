#pragma once

#include <functional>
#include <map>
#include <vector>

#include "tac/circuit.hpp"
#include "tac/model.hpp"
#include "tac/relu_net.hpp"

namespace tac {

// Joint-with-evidence values P*(q) per query state plus the normalized
// posterior. `inconsistent` marks a zero evidence probability.
struct QueryResult {
  std::vector<double> joint;
  std::vector<double> posterior;
  bool inconsistent = false;
};

// Exact inference by enumerating the full joint. Independent of the factor
// engine and the compiler; this is the oracle both are tested against.
// Requires a BN (no testing CPTs) and a feasible state space (<= 2^20).
QueryResult brute_force_query(const TbnModel& model, const Evidence& evidence, VarId query);

// Same enumeration, but over a joint instantiation of `targets`
// (mixed-radix order, last variable fastest).
QueryResult brute_force_joint(const TbnModel& model, const Evidence& evidence,
                              const std::vector<VarId>& targets);

// Reference TBN semantics: visit nodes parents-before-children, select each
// testing CPT from the posterior on its parents given evidence on its
// ancestors, then run exact inference on the selected BN. The selected BN
// is also returned for inspection.
QueryResult select_then_infer(const TbnModel& model, const Evidence& evidence, VarId query);
TbnModel select_bn(const TbnModel& model, const Evidence& evidence);

// ---------------------------------------------------------------------------
// Multi-linear form extraction

// f(lambda_1..lambda_n) = sum over I of C_I * prod_{i in I} lambda_i.
// Subsets are bitmasks over the n evidence slots.
struct MultilinearPoly {
  int dims = 0;
  std::map<uint32_t, double> coeffs;

  double eval(const std::vector<double>& lambda) const;
};

struct MultilinearFit {
  MultilinearPoly poly;
  double max_residual = 0.0;  // over random interior points
};

using EvidenceFn = std::function<double(const std::vector<double>&)>;

// Recovers the multi-linear coefficients from evaluations at the 2^n corner
// vectors (multi-linear functions are determined by corner values), then
// measures the residual at `n_probe` random interior points. n <= 12.
MultilinearFit fit_multilinear(const EvidenceFn& f, int dims, int n_probe = 100,
                               uint64_t seed = 7);

// ---------------------------------------------------------------------------
// Region scanning (1 or 2 evidence dimensions)

struct Region {
  int id = 0;
  MultilinearPoly poly;       // fitted on a cell inside the region
  double max_residual = 0.0;  // of that poly across the region's cells
  std::vector<std::vector<double>> cells;  // cell-corner coordinates (low corner)
};

struct RegionReport {
  std::vector<Region> regions;
  // Boundary points located between adjacent cells with different fits,
  // refined by bisection. 1-D: x positions. 2-D: (x, y) midpoints.
  std::vector<std::vector<double>> boundaries;
  std::vector<int> cell_region;  // region id per scan cell, row-major
  int resolution = 0;
  int dims = 0;
};

// Scans [0,1]^dims at `resolution` cells per axis, fits a local multi-linear
// poly per cell, merges cells whose fits agree, and bisects boundaries to
// 1e-6. Throws ModelError if two boundaries fall within one cell.
RegionReport scan_regions(const EvidenceFn& f, int dims, int resolution,
                          double fit_tol = 1e-7);

// ---------------------------------------------------------------------------
// ReLU/step network transpilation (see relu_net.hpp for the net type)

// Builds a circuit computing the network function: linear parts become
// add/mul over constant weight leaves, relu(x) = mul(x, test(x,0,1,0)),
// step(x) = test(x,T,1,0). Inputs map to evidence slots (state 0 of a
// synthetic binary variable per input).
Circuit relu_to_tac(const ReluNet& net);

}  // namespace tac
