#include "tac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tac {

namespace {

constexpr int64_t kMaxStates = 1 << 20;

int64_t joint_size(const TbnModel& m) {
  int64_t n = 1;
  for (const auto& v : m.variables()) {
    n *= v.card();
    if (n > kMaxStates) throw ModelError("brute force: state space too large");
  }
  return n;
}

}  // namespace

QueryResult brute_force_joint(const TbnModel& model, const Evidence& evidence,
                              const std::vector<VarId>& targets) {
  if (model.has_testing())
    throw ModelError("brute force: model has testing CPTs (use select_then_infer)");
  model.validate_evidence(evidence);

  const size_t nv = model.size();
  const int64_t total = joint_size(model);

  std::vector<int> tcards;
  for (VarId t : targets) tcards.push_back(model.var(t).card());
  const int64_t tsize = mixed_radix_size(tcards);

  QueryResult r;
  r.joint.assign(tsize, 0.0);

  std::vector<int> state(nv, 0);
  std::vector<int> cards(nv);
  for (VarId v = 0; v < nv; ++v) cards[v] = model.var(v).card();

  std::vector<int> tdigits(targets.size());
  for (int64_t idx = 0; idx < total; ++idx) {
    mixed_radix_decode(cards, idx, state);
    double w = 1.0;
    for (VarId v = 0; v < nv && w != 0.0; ++v) {
      const Cpt& c = model.cpt(v);
      int64_t u = 0;
      for (VarId p : c.parents) u = u * model.var(p).card() + state[p];
      w *= c.entries[u * cards[v] + state[v]];
    }
    if (w == 0.0) continue;
    for (const auto& [ev, lam] : evidence.likelihoods) w *= lam[state[ev]];
    for (size_t i = 0; i < targets.size(); ++i) tdigits[i] = state[targets[i]];
    r.joint[mixed_radix_index(tcards, tdigits)] += w;
  }

  double sum = 0.0;
  for (double x : r.joint) sum += x;
  if (sum > 0.0) {
    for (double x : r.joint) r.posterior.push_back(x / sum);
  } else {
    r.inconsistent = true;
    r.posterior.assign(r.joint.size(), 0.0);
  }
  return r;
}

QueryResult brute_force_query(const TbnModel& model, const Evidence& evidence, VarId query) {
  return brute_force_joint(model, evidence, {query});
}

TbnModel select_bn(const TbnModel& model, const Evidence& evidence) {
  model.validate_evidence(evidence);
  std::vector<Cpt> selected(model.size());
  std::vector<bool> done(model.size(), false);

  for (VarId x : model.topo_order()) {
    const Cpt& c = model.cpt(x);
    if (!c.testing()) {
      selected[x] = c;
      done[x] = true;
      continue;
    }

    // Posterior on the parents from the partial BN restricted to the
    // ancestors of x, with evidence restricted to those ancestors.
    std::vector<VarId> anc = model.ancestors(x);
    std::vector<VarId> remap(model.size(), kNoVar);
    std::vector<Variable> avars;
    std::vector<Cpt> acpts;
    for (VarId a : anc) {
      remap[a] = static_cast<VarId>(avars.size());
      avars.push_back(model.var(a));
    }
    for (VarId a : anc) {
      Cpt ac = selected[a];  // ancestors are visited (and selected) already
      ac.child = remap[a];
      for (auto& p : ac.parents) p = remap[p];
      acpts.push_back(std::move(ac));
    }
    TbnModel partial(std::move(avars), std::move(acpts));
    Evidence aev;
    for (const auto& [v, lam] : evidence.likelihoods)
      if (remap[v] != kNoVar) aev.likelihoods[remap[v]] = lam;

    std::vector<VarId> parents_remapped;
    for (VarId p : c.parents) parents_remapped.push_back(remap[p]);
    QueryResult post = brute_force_joint(partial, aev, parents_remapped);

    const int card = model.var(x).card();
    const int64_t np = model.n_parent_states(x);
    Cpt flat;
    flat.child = x;
    flat.parents = c.parents;
    flat.kind = CptKind::Regular;
    flat.entries.resize(np * card);
    for (int64_t u = 0; u < np; ++u) {
      // zero evidence probability selects the pos branch, matching the
      // compiled test node's 0 >= 0*T convention
      bool pos = post.inconsistent || post.posterior[u] >= c.thresholds[u];
      for (int s = 0; s < card; ++s)
        flat.entries[u * card + s] =
            pos ? c.pos_entries[u * card + s] : c.neg_entries[u * card + s];
    }
    selected[x] = std::move(flat);
    done[x] = true;
  }

  std::vector<Variable> vars(model.variables());
  return TbnModel(std::move(vars), std::move(selected));
}

QueryResult select_then_infer(const TbnModel& model, const Evidence& evidence, VarId query) {
  TbnModel bn = model.has_testing() ? select_bn(model, evidence) : model;
  return brute_force_query(bn, evidence, query);
}

// ---------------------------------------------------------------------------

double MultilinearPoly::eval(const std::vector<double>& lambda) const {
  double total = 0.0;
  for (const auto& [mask, c] : coeffs) {
    double term = c;
    for (int i = 0; i < dims; ++i)
      if (mask & (1u << i)) term *= lambda[i];
    total += term;
  }
  return total;
}

MultilinearFit fit_multilinear(const EvidenceFn& f, int dims, int n_probe, uint64_t seed) {
  if (dims < 0 || dims > 12) throw ModelError("fit_multilinear: dims must be in [0,12]");
  const uint32_t corners = 1u << dims;

  // corner evaluations, then a Moebius transform turns them into C_I
  std::vector<double> vals(corners);
  std::vector<double> lambda(dims);
  for (uint32_t mask = 0; mask < corners; ++mask) {
    for (int i = 0; i < dims; ++i) lambda[i] = (mask >> i) & 1 ? 1.0 : 0.0;
    vals[mask] = f(lambda);
  }
  for (int b = 0; b < dims; ++b)
    for (uint32_t mask = 0; mask < corners; ++mask)
      if (mask & (1u << b)) vals[mask] -= vals[mask ^ (1u << b)];

  MultilinearFit fit;
  fit.poly.dims = dims;
  for (uint32_t mask = 0; mask < corners; ++mask)
    if (vals[mask] != 0.0) fit.poly.coeffs[mask] = vals[mask];

  std::mt19937_64 rng(seed);
  auto unit = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
  for (int p = 0; p < n_probe; ++p) {
    for (int i = 0; i < dims; ++i) lambda[i] = unit();
    fit.max_residual = std::max(fit.max_residual,
                                std::abs(f(lambda) - fit.poly.eval(lambda)));
  }
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

// bilinear (or linear) fit of one scan cell from its corner values
MultilinearPoly fit_cell(const EvidenceFn& f, int dims, const std::vector<double>& lo,
                         double h) {
  MultilinearPoly poly;
  poly.dims = dims;
  const uint32_t corners = 1u << dims;
  std::vector<double> vals(corners);
  std::vector<double> lambda(dims);
  for (uint32_t mask = 0; mask < corners; ++mask) {
    for (int i = 0; i < dims; ++i) lambda[i] = lo[i] + ((mask >> i) & 1 ? h : 0.0);
    vals[mask] = f(lambda);
  }
  // Moebius over the unit cell, then rescale to global coordinates
  for (int b = 0; b < dims; ++b)
    for (uint32_t mask = 0; mask < corners; ++mask)
      if (mask & (1u << b)) vals[mask] -= vals[mask ^ (1u << b)];
  // vals[mask] is now the coefficient of prod((lambda_i - lo_i)/h); expand.
  for (uint32_t mask = 0; mask < corners; ++mask) {
    double c = vals[mask];
    int bits = std::popcount(mask);
    for (int i = 0; i < bits; ++i) c /= h;
    // expand prod_{i in mask} (lambda_i - lo_i) into subsets
    for (uint32_t sub = mask;; sub = (sub - 1) & mask) {
      double term = c;
      for (int i = 0; i < dims; ++i)
        if ((mask & (1u << i)) && !(sub & (1u << i))) term *= -lo[i];
      poly.coeffs[sub] += term;
      if (sub == 0) break;
    }
  }
  for (auto it = poly.coeffs.begin(); it != poly.coeffs.end();)
    it = std::abs(it->second) < 1e-13 ? poly.coeffs.erase(it) : std::next(it);
  return poly;
}

bool polys_agree(const MultilinearPoly& a, const MultilinearPoly& b, double tol) {
  std::map<uint32_t, double> diff;
  for (const auto& [m, c] : a.coeffs) diff[m] += c;
  for (const auto& [m, c] : b.coeffs) diff[m] -= c;
  for (const auto& [m, d] : diff)
    if (std::abs(d) > tol) return false;
  return true;
}

}  // namespace

RegionReport scan_regions(const EvidenceFn& f, int dims, int resolution, double fit_tol) {
  if (dims != 1 && dims != 2) throw ModelError("scan_regions: dims must be 1 or 2");
  if (resolution < 4) throw ModelError("scan_regions: resolution too small");

  RegionReport rep;
  rep.dims = dims;
  rep.resolution = resolution;
  const double h = 1.0 / resolution;
  const int n_cells = dims == 1 ? resolution : resolution * resolution;

  std::vector<MultilinearPoly> fits(n_cells);
  std::vector<double> lo(dims);
  for (int cell = 0; cell < n_cells; ++cell) {
    lo[0] = (dims == 1 ? cell : cell / resolution) * h;
    if (dims == 2) lo[1] = (cell % resolution) * h;
    fits[cell] = fit_cell(f, dims, lo, h);
  }

  // merge agreeing neighbours into regions (flood fill)
  const double merge_tol = std::max(fit_tol * 50, 1e-9);
  rep.cell_region.assign(n_cells, -1);
  auto neighbours = [&](int cell, std::vector<int>& out) {
    out.clear();
    if (dims == 1) {
      if (cell > 0) out.push_back(cell - 1);
      if (cell + 1 < resolution) out.push_back(cell + 1);
    } else {
      int i = cell / resolution, j = cell % resolution;
      if (i > 0) out.push_back(cell - resolution);
      if (i + 1 < resolution) out.push_back(cell + resolution);
      if (j > 0) out.push_back(cell - 1);
      if (j + 1 < resolution) out.push_back(cell + 1);
    }
  };

  int next_region = 0;
  std::vector<int> nb;
  for (int seed_cell = 0; seed_cell < n_cells; ++seed_cell) {
    if (rep.cell_region[seed_cell] >= 0) continue;
    const int id = next_region++;
    std::vector<int> stack{seed_cell};
    rep.cell_region[seed_cell] = id;
    Region region;
    region.id = id;
    region.poly = fits[seed_cell];
    while (!stack.empty()) {
      int cell = stack.back();
      stack.pop_back();
      lo[0] = (dims == 1 ? cell : cell / resolution) * h;
      if (dims == 2) lo[1] = (cell % resolution) * h;
      region.cells.push_back(lo);
      neighbours(cell, nb);
      for (int other : nb) {
        if (rep.cell_region[other] >= 0) continue;
        if (polys_agree(fits[cell], fits[other], merge_tol)) {
          rep.cell_region[other] = id;
          stack.push_back(other);
        }
      }
    }
    rep.regions.push_back(std::move(region));
  }

  // residual of each region's poly across its cells (certifies the fit)
  std::vector<double> probe(dims);
  for (Region& region : rep.regions) {
    for (const auto& cell_lo : region.cells) {
      for (int i = 0; i < dims; ++i) probe[i] = cell_lo[i] + h / 2;
      region.max_residual =
          std::max(region.max_residual, std::abs(f(probe) - region.poly.eval(probe)));
    }
  }

  // boundary localization (1-D): bisect between cells of different regions
  if (dims == 1) {
    int last_change = -10;
    for (int cell = 0; cell + 1 < resolution; ++cell) {
      if (rep.cell_region[cell] == rep.cell_region[cell + 1]) continue;
      if (cell - last_change == 1)
        throw ModelError("scan_regions: two boundaries within one cell, "
                         "increase the resolution");
      last_change = cell;
      const MultilinearPoly& left = fits[cell];
      double a = cell * h + h / 2, b = (cell + 1) * h + h / 2;
      for (int it = 0; it < 60 && b - a > 1e-9; ++it) {
        double mid = (a + b) / 2;
        probe[0] = mid;
        if (std::abs(f(probe) - left.eval(probe)) <= merge_tol)
          a = mid;
        else
          b = mid;
      }
      rep.boundaries.push_back({(a + b) / 2});
    }
  } else {
    for (int cell = 0; cell < n_cells; ++cell) {
      int i = cell / resolution, j = cell % resolution;
      if (i + 1 < resolution && rep.cell_region[cell] != rep.cell_region[cell + resolution])
        rep.boundaries.push_back({(i + 1) * h, (j + 0.5) * h});
      if (j + 1 < resolution && rep.cell_region[cell] != rep.cell_region[cell + 1])
        rep.boundaries.push_back({(i + 0.5) * h, (j + 1) * h});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

Circuit relu_to_tac(const ReluNet& net) {
  net.validate();
  CircuitBuilder b(true);

  std::vector<NodeId> cur;
  for (int i = 0; i < net.input_dim(); ++i)
    cur.push_back(b.evidence("x" + std::to_string(i), 0, 2));

  const NodeId zero = b.constant(0.0);
  const NodeId one = b.constant(1.0);

  for (const ReluLayer& layer : net.layers) {
    std::vector<NodeId> next;
    for (int j = 0; j < layer.out_dim; ++j) {
      std::vector<NodeId> terms;
      for (int i = 0; i < layer.in_dim; ++i)
        terms.push_back(b.mul2(b.constant(layer.weights[j * layer.in_dim + i]), cur[i]));
      terms.push_back(b.constant(layer.bias[j]));
      NodeId z = b.add(std::move(terms));
      switch (layer.activation) {
        case Activation::Linear:
          next.push_back(z);
          break;
        case Activation::Relu:
          // g(z) = z * [z >= 0]
          next.push_back(b.mul2(z, b.test(z, zero, one, zero)));
          break;
        case Activation::Step:
          next.push_back(b.test(z, b.constant(layer.step_thresholds[j]), one, zero));
          break;
      }
    }
    cur = std::move(next);
  }
  return b.finish(cur);
}

}  // namespace tac
