#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "tac/circuit.hpp"
#include "tac/model.hpp"

namespace tac {

struct FactorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A table over a variable set. Cells are numbers (concrete mode,
// Cell = double) or circuit-node handles (symbolic mode, Cell = NodeId).
// Scope is kept sorted by variable id; cells are mixed-radix indexed with
// the LAST scope variable fastest. Both conventions are load-bearing:
// they make compiled circuits reproducible byte-for-byte.
template <typename CellT>
struct Factor {
  using Cell = CellT;

  std::vector<VarId> scope;
  std::vector<int> cards;
  std::vector<Cell> cells;

  int64_t size() const { return static_cast<int64_t>(cells.size()); }

  bool has_var(VarId v) const {
    return std::binary_search(scope.begin(), scope.end(), v);
  }

  int64_t stride_of(VarId v) const {
    int64_t stride = 1;
    for (size_t i = scope.size(); i-- > 0;) {
      if (scope[i] == v) return stride;
      stride *= cards[i];
    }
    throw FactorError("variable not in factor scope");
  }
};

// Cell algebras. The factor operations below are generic over these; the
// compiler instantiates the symbolic one, tests and oracles the numeric one.
struct NumericOps {
  using Cell = double;
  Cell mul(Cell a, Cell b) const { return a * b; }
  Cell sum(std::span<const Cell> xs) const {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
};

struct SymbolicOps {
  using Cell = NodeId;
  CircuitBuilder* builder = nullptr;
  Cell mul(Cell a, Cell b) const { return builder->mul2(a, b); }
  Cell sum(std::span<const Cell> xs) const {
    return builder->add(std::vector<NodeId>(xs.begin(), xs.end()));
  }
};

namespace detail {

// Strides of each result-scope variable inside a source factor (0 when the
// source does not mention the variable).
template <typename Cell>
std::vector<int64_t> projection_strides(const std::vector<VarId>& result_scope,
                                        const Factor<Cell>& src) {
  std::vector<int64_t> strides(result_scope.size(), 0);
  for (size_t i = 0; i < result_scope.size(); ++i)
    if (src.has_var(result_scope[i])) strides[i] = src.stride_of(result_scope[i]);
  return strides;
}

}  // namespace detail

// Factor product: scope = union of scopes, cells multiplied pointwise over
// compatible instantiations.
template <typename Ops>
Factor<typename Ops::Cell> multiply(const Factor<typename Ops::Cell>& f,
                                    const Factor<typename Ops::Cell>& g, const Ops& ops) {
  using Cell = typename Ops::Cell;
  Factor<Cell> r;
  r.scope.reserve(f.scope.size() + g.scope.size());
  std::set_union(f.scope.begin(), f.scope.end(), g.scope.begin(), g.scope.end(),
                 std::back_inserter(r.scope));
  r.cards.resize(r.scope.size());
  for (size_t i = 0; i < r.scope.size(); ++i) {
    VarId v = r.scope[i];
    auto it = std::lower_bound(f.scope.begin(), f.scope.end(), v);
    if (it != f.scope.end() && *it == v)
      r.cards[i] = f.cards[it - f.scope.begin()];
    else {
      auto jt = std::lower_bound(g.scope.begin(), g.scope.end(), v);
      r.cards[i] = g.cards[jt - g.scope.begin()];
    }
  }

  auto fs = detail::projection_strides(r.scope, f);
  auto gs = detail::projection_strides(r.scope, g);
  const int64_t n = mixed_radix_size(r.cards);
  r.cells.resize(n);

  std::vector<int> digits(r.scope.size(), 0);
  int64_t fi = 0, gi = 0;
  for (int64_t idx = 0;; ++idx) {
    r.cells[idx] = ops.mul(f.cells[fi], g.cells[gi]);
    if (idx + 1 == n) break;
    // odometer increment, last digit fastest
    for (size_t d = r.scope.size(); d-- > 0;) {
      ++digits[d];
      fi += fs[d];
      gi += gs[d];
      if (digits[d] < r.cards[d]) break;
      fi -= fs[d] * r.cards[d];
      gi -= gs[d] * r.cards[d];
      digits[d] = 0;
    }
  }
  return r;
}

// Sums the given variables out of the factor. Summation order is the
// mixed-radix order of the removed variables (deterministic).
template <typename Ops>
Factor<typename Ops::Cell> sum_out(const Factor<typename Ops::Cell>& f,
                                   const std::vector<VarId>& vars, const Ops& ops) {
  using Cell = typename Ops::Cell;
  for (VarId v : vars)
    if (!f.has_var(v)) throw FactorError("sum_out: variable not in factor scope");
  if (vars.empty()) return f;

  Factor<Cell> r;
  std::vector<VarId> removed;
  std::vector<int> removed_cards;
  for (size_t i = 0; i < f.scope.size(); ++i) {
    if (std::find(vars.begin(), vars.end(), f.scope[i]) != vars.end()) {
      removed.push_back(f.scope[i]);
      removed_cards.push_back(f.cards[i]);
    } else {
      r.scope.push_back(f.scope[i]);
      r.cards.push_back(f.cards[i]);
    }
  }

  auto keep_strides = detail::projection_strides(r.scope, f);
  std::vector<int64_t> rem_strides(removed.size());
  for (size_t i = 0; i < removed.size(); ++i) rem_strides[i] = f.stride_of(removed[i]);

  const int64_t n_keep = mixed_radix_size(r.cards);
  const int64_t n_rem = mixed_radix_size(removed_cards);
  r.cells.resize(n_keep);

  std::vector<Cell> terms(n_rem);
  std::vector<int> kd, rd;
  for (int64_t ki = 0; ki < n_keep; ++ki) {
    mixed_radix_decode(r.cards, ki, kd);
    int64_t base = 0;
    for (size_t d = 0; d < kd.size(); ++d) base += kd[d] * keep_strides[d];
    for (int64_t ri = 0; ri < n_rem; ++ri) {
      mixed_radix_decode(removed_cards, ri, rd);
      int64_t off = base;
      for (size_t d = 0; d < rd.size(); ++d) off += rd[d] * rem_strides[d];
      terms[ri] = f.cells[off];
    }
    r.cells[ki] = ops.sum(terms);
  }
  return r;
}

}  // namespace tac
