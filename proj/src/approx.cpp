#include "tac/approx.hpp"

#include <algorithm>
#include <cmath>

#include "tac/model_io.hpp"

namespace tac {

namespace {

constexpr double kEndpointTol = 1e-9;

// rightmost-ish preimage of `level` under a non-decreasing g on [lo, hi]
double bisect_level(const std::function<double(double)>& g, double level, double lo,
                    double hi) {
  double a = lo, b = hi;
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    double mid = 0.5 * (a + b);
    if (g(mid) < level)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

// activation weight of one testing node with threshold t under evidence x:
// x * [x >= t] + (1-x) * [x > t]  (the two parent-state rows select
// independently under the uniform >= convention)
inline double activation(double x, double t) {
  double w = 0.0;
  if (x >= t) w += x;
  if (x > t) w += 1.0 - x;
  return w;
}

}  // namespace

MonotonicApproximator::MonotonicApproximator(int n_steps, std::vector<double> thresholds)
    : n_(n_steps), thresholds_(std::move(thresholds)) {
  if (n_ < 1) throw ApproxError("approximator needs n_steps >= 1");
  if ((int)thresholds_.size() != n_) throw ApproxError("need one threshold per step");
}

double MonotonicApproximator::posterior(double x) const {
  double acc = 0.0;
  for (double t : thresholds_) acc += activation(x, t);
  return acc / n_;
}

TbnModel MonotonicApproximator::to_tbn() const {
  if (n_ > kDenseTbnLimit)
    throw ApproxError("to_tbn: output CPT has " + std::to_string(n_) +
                      "+1 parents; dense form is limited to N <= " +
                      std::to_string(kDenseTbnLimit));

  std::vector<Variable> vars;
  std::vector<Cpt> cpts;

  const VarId z = 0;
  vars.push_back({"Z", {"z", "~z"}});
  cpts.push_back(regular_cpt(z, {}, {0.5, 0.5}));

  const VarId sel = 1;
  std::vector<std::string> istates;
  for (int i = 1; i <= n_; ++i) istates.push_back("i" + std::to_string(i));
  vars.push_back({"I", istates});
  cpts.push_back(regular_cpt(sel, {}, std::vector<double>(n_, 1.0 / n_)));

  std::vector<VarId> ynodes;
  for (int i = 0; i < n_; ++i) {
    VarId yi = static_cast<VarId>(vars.size());
    ynodes.push_back(yi);
    vars.push_back({"Y" + std::to_string(i + 1), {"y", "~y"}});
    const double t = thresholds_[i];
    cpts.push_back(testing_cpt(yi, {z}, {t, 1.0 - t}, {1, 0, 0, 1}, {0, 1, 1, 0}));
  }

  // Y equals Y_i when I = i
  VarId out = static_cast<VarId>(vars.size());
  vars.push_back({"Y", {"y", "~y"}});
  std::vector<VarId> parents = ynodes;
  parents.push_back(sel);
  std::vector<int> pcards(n_, 2);
  pcards.push_back(n_);
  const int64_t np = mixed_radix_size(pcards);
  std::vector<double> entries(np * 2);
  std::vector<int> digits;
  for (int64_t u = 0; u < np; ++u) {
    mixed_radix_decode(pcards, u, digits);
    const int i = digits[n_];          // selector value
    const bool yi_active = digits[i] == 0;
    entries[u * 2 + 0] = yi_active ? 1.0 : 0.0;
    entries[u * 2 + 1] = yi_active ? 0.0 : 1.0;
  }
  cpts.push_back(regular_cpt(out, parents, std::move(entries)));

  return TbnModel(std::move(vars), std::move(cpts));
}

MonotonicApproximator build_monotonic(const Fn1d& f, int n_steps) {
  if (n_steps < 1) throw ApproxError("build_monotonic: n_steps >= 1 required");
  if (std::abs(f(0.0)) > kEndpointTol || std::abs(f(1.0) - 1.0) > kEndpointTol)
    throw ApproxError("build_monotonic: f must satisfy f(0)=0 and f(1)=1");

  double prev = f(0.0);
  for (int k = 1; k <= 1000; ++k) {
    double cur = f(k / 1000.0);
    if (cur < prev - kEndpointTol)
      throw ApproxError("build_monotonic: f is not non-decreasing (detected near x=" +
                        std::to_string(k / 1000.0) + ")");
    prev = cur;
  }

  std::vector<double> thresholds(n_steps);
  for (int i = 1; i <= n_steps; ++i)
    thresholds[i - 1] = bisect_level(f, static_cast<double>(i) / n_steps, 0.0, 1.0);
  return MonotonicApproximator(n_steps, std::move(thresholds));
}

// ---------------------------------------------------------------------------

PiecewiseApproximator::PiecewiseApproximator(std::vector<MonotonePiece> pieces,
                                             std::vector<double> borders)
    : pieces_(std::move(pieces)), borders_(std::move(borders)) {
  if (pieces_.empty()) throw ApproxError("piecewise approximator needs pieces");
  if (borders_.size() + 1 != pieces_.size())
    throw ApproxError("piecewise approximator needs pieces-1 borders");
}

double PiecewiseApproximator::piece_value(const MonotonePiece& p, double x) const {
  if (p.thresholds.empty()) return p.f_lo;  // flat piece
  double acc = 0.0;
  for (double t : p.thresholds) acc += activation(x, t);
  return p.f_lo + (p.f_hi - p.f_lo) * (acc / p.thresholds.size());
}

double PiecewiseApproximator::posterior(double x) const {
  // Mix pieces through the gate chain exactly as the selected BN would:
  // off the border lattice the gates are hard 0/1 switches.
  double val = piece_value(pieces_[0], x);
  for (size_t p = 1; p < pieces_.size(); ++p) {
    double w = activation(x, borders_[p - 1]);
    val = w * piece_value(pieces_[p], x) + (1.0 - w) * val;
  }
  return val;
}

TbnModel PiecewiseApproximator::to_tbn() const {
  std::vector<Variable> vars;
  std::vector<Cpt> cpts;

  const VarId z = 0;
  vars.push_back({"Z", {"z", "~z"}});
  cpts.push_back(regular_cpt(z, {}, {0.5, 0.5}));

  VarId chain = kNoVar;
  for (size_t p = 0; p < pieces_.size(); ++p) {
    const MonotonePiece& piece = pieces_[p];
    const int n = static_cast<int>(piece.thresholds.size());
    if (n < 1 || n > kDenseTbnLimit)
      throw ApproxError("to_tbn: piece step count outside dense limits");
    const std::string tag = std::to_string(p + 1);

    VarId sel = static_cast<VarId>(vars.size());
    std::vector<std::string> istates;
    for (int i = 1; i <= n; ++i) istates.push_back("i" + std::to_string(i));
    vars.push_back({"I" + tag, istates});
    cpts.push_back(regular_cpt(sel, {}, std::vector<double>(n, 1.0 / n)));

    std::vector<VarId> ynodes;
    for (int i = 0; i < n; ++i) {
      VarId yi = static_cast<VarId>(vars.size());
      ynodes.push_back(yi);
      vars.push_back({"Y" + tag + "_" + std::to_string(i + 1), {"y", "~y"}});
      const double t = piece.thresholds[i];
      cpts.push_back(testing_cpt(yi, {z}, {t, 1.0 - t}, {1, 0, 0, 1}, {0, 1, 1, 0}));
    }

    // mux over the piece's testing nodes
    VarId mux = static_cast<VarId>(vars.size());
    vars.push_back({"M" + tag, {"y", "~y"}});
    {
      std::vector<VarId> parents = ynodes;
      parents.push_back(sel);
      std::vector<int> pcards(n, 2);
      pcards.push_back(n);
      const int64_t np = mixed_radix_size(pcards);
      std::vector<double> entries(np * 2);
      std::vector<int> digits;
      for (int64_t u = 0; u < np; ++u) {
        mixed_radix_decode(pcards, u, digits);
        const bool active = digits[digits[n]] == 0;
        entries[u * 2 + 0] = active ? 1.0 : 0.0;
        entries[u * 2 + 1] = active ? 0.0 : 1.0;
      }
      cpts.push_back(regular_cpt(mux, std::move(parents), std::move(entries)));
    }

    // level restore: P(level | mux) = f_hi when active else f_lo
    VarId level = static_cast<VarId>(vars.size());
    vars.push_back({"L" + tag, {"y", "~y"}});
    cpts.push_back(regular_cpt(level, {mux},
                               {piece.f_hi, 1.0 - piece.f_hi, piece.f_lo, 1.0 - piece.f_lo}));

    if (p == 0) {
      chain = level;
      continue;
    }

    // gate: active iff x >= border
    VarId gate = static_cast<VarId>(vars.size());
    vars.push_back({"G" + tag, {"on", "off"}});
    const double b = borders_[p - 1];
    cpts.push_back(testing_cpt(gate, {z}, {b, 1.0 - b}, {1, 0, 0, 1}, {0, 1, 1, 0}));

    // copy node: gate on -> level, else previous chain value
    VarId next = static_cast<VarId>(vars.size());
    vars.push_back({"C" + tag, {"y", "~y"}});
    std::vector<VarId> parents{chain, level, gate};
    std::vector<int> pcards{2, 2, 2};
    const int64_t np = mixed_radix_size(pcards);
    std::vector<double> entries(np * 2);
    std::vector<int> digits;
    for (int64_t u = 0; u < np; ++u) {
      mixed_radix_decode(pcards, u, digits);
      const bool on = digits[2] == 0;
      const bool value = on ? digits[1] == 0 : digits[0] == 0;
      entries[u * 2 + 0] = value ? 1.0 : 0.0;
      entries[u * 2 + 1] = value ? 0.0 : 1.0;
    }
    cpts.push_back(regular_cpt(next, std::move(parents), std::move(entries)));
    chain = next;
  }

  return TbnModel(std::move(vars), std::move(cpts));
}

std::vector<double> detect_breakpoints(const Fn1d& f, double step) {
  std::vector<double> bps;
  int last_sign = 0;
  double prev = f(0.0);
  for (double x = step; x <= 1.0 + step / 2; x += step) {
    double cur = f(std::min(x, 1.0));
    double d = cur - prev;
    int sign = d > 1e-12 ? 1 : (d < -1e-12 ? -1 : 0);
    if (sign != 0) {
      if (last_sign != 0 && sign != last_sign) bps.push_back(std::min(x, 1.0) - step);
      last_sign = sign;
    }
    prev = cur;
  }
  return bps;
}

PiecewiseApproximator build_piecewise_1d(const Fn1d& f, int n_steps_per_piece,
                                         std::vector<double> breakpoints) {
  if (n_steps_per_piece < 1) throw ApproxError("build_piecewise_1d: n_steps >= 1 required");
  if (breakpoints.empty()) breakpoints = detect_breakpoints(f);
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double b : breakpoints)
    if (!(b > 0.0 && b < 1.0)) throw ApproxError("breakpoints must be interior");

  std::vector<double> edges{0.0};
  for (double b : breakpoints) edges.push_back(b);
  edges.push_back(1.0);

  std::vector<MonotonePiece> pieces;
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    MonotonePiece piece;
    piece.lo = edges[p];
    piece.hi = edges[p + 1];
    piece.f_lo = f(piece.lo);
    piece.f_hi = f(piece.hi);
    const double range = piece.f_hi - piece.f_lo;

    if (std::abs(range) < 1e-12) {
      pieces.push_back(std::move(piece));  // flat; no testing nodes needed
      continue;
    }

    // normalized, increasing view of the piece
    auto g = [&](double x) { return (f(x) - piece.f_lo) / range; };
    const int scan = 200;
    double prev = g(piece.lo);
    for (int k = 1; k <= scan; ++k) {
      double cur = g(piece.lo + (piece.hi - piece.lo) * k / scan);
      if (cur < prev - 1e-7)
        throw ApproxError("build_piecewise_1d: piece [" + std::to_string(piece.lo) + ", " +
                          std::to_string(piece.hi) + "] is not monotone");
      prev = cur;
    }

    piece.thresholds.resize(n_steps_per_piece);
    for (int i = 1; i <= n_steps_per_piece; ++i)
      piece.thresholds[i - 1] =
          bisect_level(g, static_cast<double>(i) / n_steps_per_piece, piece.lo, piece.hi);
    pieces.push_back(std::move(piece));
  }

  return PiecewiseApproximator(std::move(pieces), std::move(breakpoints));
}

double verify_bound(const std::function<double(double)>& posterior, const Fn1d& f,
                    int grid_points) {
  double worst = 0.0;
  for (int j = 0; j < grid_points; ++j) {
    double x = grid_points == 1 ? 0.0 : static_cast<double>(j) / (grid_points - 1);
    worst = std::max(worst, std::abs(posterior(x) - f(x)));
  }
  return worst;
}

}  // namespace tac
