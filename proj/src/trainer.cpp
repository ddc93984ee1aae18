#include "tac/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tac {

namespace {

// splitmix64; self-contained so training streams are identical across
// standard libraries
inline uint64_t next_u64(uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double next_unit(uint64_t& s) { return (next_u64(s) >> 11) * 0x1.0p-53; }

void shuffle_ids(std::vector<int>& ids, uint64_t& s) {
  for (size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[next_u64(s) % i]);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> predict_rows(const Circuit& c,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::vector<double>>& rows,
                                 Backend backend) {
  constexpr int L = BatchContext::kLanes;
  BatchContext batch(c);

  std::vector<std::pair<uint32_t, uint32_t>> slots;
  for (const auto& name : feature_names) {
    auto it = c.evidence_vars().find(name);
    if (it == c.evidence_vars().end() || it->second.size() != 2)
      throw TrainError("predict_rows: feature '" + name + "' must bind a binary variable");
    slots.emplace_back(it->second[0], it->second[1]);
  }

  std::vector<double> out(rows.size());
  for (size_t chunk = 0; chunk < rows.size(); chunk += L) {
    const int active = static_cast<int>(std::min<size_t>(L, rows.size() - chunk));
    for (int l = 0; l < L; ++l) {
      const auto& row = rows[chunk + (l < active ? l : 0)];
      for (size_t j = 0; j < slots.size(); ++j) {
        batch.set_lane_evidence(l, slots[j].first, row[j]);
        batch.set_lane_evidence(l, slots[j].second, 1.0 - row[j]);
      }
    }
    batch_forward(c, batch, backend);
    for (int l = 0; l < active; ++l) {
      double sum = 0.0;
      for (size_t k = 0; k < c.outputs().size(); ++k) sum += batch.output(k, l);
      out[chunk + l] = sum > 0.0 ? batch.output(0, l) / sum : 0.0;
    }
  }
  return out;
}

TrainSession::TrainSession(const Circuit& circuit, Dataset data, TrainConfig cfg)
    : circuit_(&circuit), data_(std::move(data)), cfg_(cfg), batch_(circuit) {
  if (circuit.outputs().empty()) throw TrainError("trainer: circuit has no outputs");

  for (const auto& name : data_.feature_names) {
    auto it = circuit.evidence_vars().find(name);
    if (it == circuit.evidence_vars().end())
      throw TrainError("trainer: no evidence variable '" + name + "' in circuit");
    if (it->second.size() != 2 || it->second[0] == Circuit::kNoSlot ||
        it->second[1] == Circuit::kNoSlot)
      throw TrainError("trainer: feature '" + name + "' must bind a binary variable");
    feature_slots_.emplace_back(it->second[0], it->second[1]);
  }
  for (const auto& row : data_.rows)
    if (row.size() != feature_slots_.size())
      throw TrainError("trainer: dataset row width mismatch");
  for (double v : data_.labels)
    if (!(v >= 0.0 && v <= 1.0)) throw TrainError("trainer: label outside [0,1]");

  frozen_values_.assign(circuit.params().size(), std::numeric_limits<double>::quiet_NaN());
  build_groups();

  // 90/10-style split by seeded shuffle (stream independent of the meta
  // initialization so freezing params never moves the split)
  uint64_t split_rng = cfg_.seed ^ 0x5851f42d4c957f2dull;
  std::vector<int> ids(data_.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  shuffle_ids(ids, split_rng);
  size_t n_val = static_cast<size_t>(cfg_.validation_fraction * ids.size());
  if (n_val >= ids.size()) n_val = ids.size() == 0 ? 0 : ids.size() - 1;
  val_idx_.assign(ids.begin(), ids.begin() + n_val);
  train_idx_.assign(ids.begin() + n_val, ids.end());

  rng_state_ = cfg_.seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
}

void TrainSession::build_groups() {
  groups_.clear();
  metas_.clear();
  uint64_t meta_rng = cfg_.seed + 0x9856a2b3c4d5e6f7ull;

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<int>> members;
  for (size_t p = 0; p < circuit_->params().size(); ++p) {
    const ParamInfo& info = circuit_->params()[p];
    if (!info.trainable) continue;
    if (members.find(info.group) == members.end()) group_order.push_back(info.group);
    members[info.group].push_back(static_cast<int>(p));
  }

  for (const auto& gname : group_order) {
    auto& ps = members[gname];
    std::sort(ps.begin(), ps.end(), [&](int a, int b) {
      return circuit_->params()[a].state < circuit_->params()[b].state;
    });
    // a row with any frozen member is fixed entirely
    bool any_frozen = false;
    for (int p : ps)
      if (!std::isnan(frozen_values_[p])) any_frozen = true;
    if (any_frozen) continue;

    Group g;
    g.params = ps;
    if (circuit_->params()[ps[0]].role == ParamRole::Threshold) {
      g.kind = Group::Kind::Threshold;
      g.meta_count = 1;
    } else if (ps.size() == 2) {
      g.kind = Group::Kind::Logistic;
      g.meta_count = 1;
    } else {
      g.kind = Group::Kind::Softmax;
      g.meta_count = static_cast<int>(ps.size());
    }
    g.meta_begin = static_cast<int>(metas_.size());
    for (int i = 0; i < g.meta_count; ++i) metas_.push_back(next_unit(meta_rng) - 0.5);
    groups_.push_back(std::move(g));
  }
  realized_dirty_ = true;
}

void TrainSession::freeze(const std::string& param_name, double value) {
  int idx = circuit_->param_index(param_name);
  if (idx < 0) throw TrainError("trainer: unknown parameter '" + param_name + "'");
  frozen_values_[idx] = value;
  build_groups();
}

void TrainSession::realize() {
  if (!realized_dirty_ && !realized_.empty()) return;
  realized_.resize(circuit_->params().size());
  for (size_t p = 0; p < realized_.size(); ++p)
    realized_[p] = std::isnan(frozen_values_[p]) ? circuit_->params()[p].init
                                                 : frozen_values_[p];
  for (const Group& g : groups_) {
    switch (g.kind) {
      case Group::Kind::Threshold:
        realized_[g.params[0]] = sigmoid(metas_[g.meta_begin]);
        break;
      case Group::Kind::Logistic: {
        double t = sigmoid(metas_[g.meta_begin]);
        realized_[g.params[0]] = t;
        realized_[g.params[1]] = 1.0 - t;
        break;
      }
      case Group::Kind::Softmax: {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < g.meta_count; ++i) mx = std::max(mx, metas_[g.meta_begin + i]);
        double z = 0.0;
        for (int i = 0; i < g.meta_count; ++i) z += std::exp(metas_[g.meta_begin + i] - mx);
        for (int i = 0; i < g.meta_count; ++i)
          realized_[g.params[i]] = std::exp(metas_[g.meta_begin + i] - mx) / z;
        break;
      }
    }
  }
  batch_.set_params(realized_);
  realized_dirty_ = false;
}

void TrainSession::pull_back(const std::vector<double>& pg, std::vector<double>& mg) {
  mg.assign(metas_.size(), 0.0);
  for (const Group& g : groups_) {
    switch (g.kind) {
      case Group::Kind::Threshold: {
        double t = sigmoid(metas_[g.meta_begin]);
        mg[g.meta_begin] = pg[g.params[0]] * t * (1.0 - t);
        break;
      }
      case Group::Kind::Logistic: {
        double t = sigmoid(metas_[g.meta_begin]);
        mg[g.meta_begin] = (pg[g.params[0]] - pg[g.params[1]]) * t * (1.0 - t);
        break;
      }
      case Group::Kind::Softmax: {
        double dot = 0.0;
        for (int i = 0; i < g.meta_count; ++i) dot += realized_[g.params[i]] * pg[g.params[i]];
        for (int i = 0; i < g.meta_count; ++i)
          mg[g.meta_begin + i] = realized_[g.params[i]] * (pg[g.params[i]] - dot);
        break;
      }
    }
  }
}

double TrainSession::run_span(const std::vector<int>& order, size_t begin, size_t end,
                              std::vector<double>* grads) {
  constexpr int L = BatchContext::kLanes;
  const Circuit& c = *circuit_;
  const size_t n_out = c.outputs().size();
  const size_t count = end - begin;
  realize();

  double sq_err = 0.0;
  std::vector<double> seeds(n_out * L);
  for (size_t chunk = 0; chunk < count; chunk += L) {
    const int active = static_cast<int>(std::min<size_t>(L, count - chunk));
    for (int l = 0; l < L; ++l) {
      const int row = order[begin + chunk + (l < active ? l : 0)];
      for (size_t j = 0; j < feature_slots_.size(); ++j) {
        double v = data_.rows[row][j];
        batch_.set_lane_evidence(l, feature_slots_[j].first, v);
        batch_.set_lane_evidence(l, feature_slots_[j].second, 1.0 - v);
      }
    }
    batch_forward(c, batch_, cfg_.backend);

    std::fill(seeds.begin(), seeds.end(), 0.0);
    for (int l = 0; l < active; ++l) {
      const int row = order[begin + chunk + l];
      double sum = 0.0;
      for (size_t k = 0; k < n_out; ++k) sum += batch_.output(k, l);
      if (!(sum > 0.0))
        throw TrainError("trainer: zero output normalizer (inconsistent evidence)");
      const double o0 = batch_.output(0, l);
      const double yhat = o0 / sum;
      const double err = yhat - data_.labels[row];
      sq_err += err * err;
      if (grads) {
        const double up = 2.0 * err;
        for (size_t k = 0; k < n_out; ++k) {
          double d = (k == 0) ? (sum - o0) / (sum * sum) : -o0 / (sum * sum);
          seeds[k * L + l] = up * d;
        }
      }
    }

    if (grads) {
      batch_.seed_output_adjoints(seeds);
      batch_backward(c, batch_, cfg_.backend);
      for (const Group& g : groups_)
        for (int p : g.params) {
          const NodeId node = c.params()[p].node;
          double acc = 0.0;
          for (int l = 0; l < L; ++l) acc += batch_.adjoint(node, l);
          (*grads)[p] += acc;
        }
    }
  }
  return sq_err;
}

TrainResult TrainSession::train() {
  TrainResult result;
  if (cfg_.epochs > 0 && train_idx_.empty())
    throw TrainError("trainer: empty training split");

  std::vector<double> m(metas_.size(), 0.0), v(metas_.size(), 0.0);
  int64_t adam_t = 0;
  std::vector<double> param_grads(circuit_->params().size());
  std::vector<double> meta_grads;

  std::vector<double> best_metas = metas_;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  std::vector<int> order = train_idx_;
  std::vector<int> val_order = val_idx_;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle_ids(order, rng_state_);

    double epoch_sq = 0.0;
    const size_t bs = cfg_.batch_size > 0 ? cfg_.batch_size : order.size();
    for (size_t at = 0; at < order.size(); at += bs) {
      const size_t stop = std::min(order.size(), at + bs);
      std::fill(param_grads.begin(), param_grads.end(), 0.0);
      epoch_sq += run_span(order, at, stop, &param_grads);

      const double inv = 1.0 / static_cast<double>(stop - at);
      for (double& g : param_grads) g *= inv;
      pull_back(param_grads, meta_grads);

      if (cfg_.optimizer == OptimizerKind::Adam) {
        ++adam_t;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, (double)adam_t);
        const double c2 = 1.0 - std::pow(b2, (double)adam_t);
        for (size_t i = 0; i < metas_.size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * meta_grads[i];
          v[i] = b2 * v[i] + (1.0 - b2) * meta_grads[i] * meta_grads[i];
          metas_[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
      } else {
        for (size_t i = 0; i < metas_.size(); ++i) metas_[i] -= cfg_.lr * meta_grads[i];
      }
      realized_dirty_ = true;
    }

    const double train_loss = epoch_sq / train_idx_.size();
    result.train_loss.push_back(train_loss);
    if (!std::isfinite(train_loss))
      throw TrainError("trainer: loss diverged at epoch " + std::to_string(epoch), epoch);

    if (!val_idx_.empty()) {
      double val = run_span(val_order, 0, val_order.size(), nullptr) / val_order.size();
      result.val_loss.push_back(val);
      if (val < best_val) {
        best_val = val;
        best_epoch = epoch;
        best_metas = metas_;
      }
    }
  }

  if (!val_idx_.empty() && best_epoch >= 0) {
    metas_ = best_metas;
    realized_dirty_ = true;
    result.best_val = best_val;
    result.best_epoch = best_epoch;
  } else if (!result.train_loss.empty()) {
    result.best_val = result.train_loss.back();
    result.best_epoch = cfg_.epochs - 1;
  }
  result.final_train = result.train_loss.empty() ? 0.0 : result.train_loss.back();
  return result;
}

double TrainSession::mse(const Dataset& d) {
  if (d.rows.empty()) throw TrainError("trainer: mse over empty batch");
  Dataset saved = std::move(data_);
  data_ = d;
  double sq;
  try {
    std::vector<int> order(d.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    sq = run_span(order, 0, order.size(), nullptr);
  } catch (...) {
    data_ = std::move(saved);
    throw;
  }
  data_ = std::move(saved);
  return sq / d.size();
}

double TrainSession::predict(const std::vector<double>& row) {
  Dataset one;
  one.feature_names = data_.feature_names;
  one.rows.push_back(row);
  one.labels.push_back(0.0);
  mse(one);  // last forward pass leaves lane 0 holding this row
  const Circuit& c = *circuit_;
  double sum = 0.0;
  for (size_t k = 0; k < c.outputs().size(); ++k) sum += batch_.output(k, 0);
  return batch_.output(0, 0) / sum;
}

const std::vector<double>& TrainSession::realized_params() {
  realize();
  return realized_;
}

Circuit TrainSession::trained_circuit() {
  realize();
  Circuit copy = *circuit_;
  copy.set_param_inits(realized_);
  return copy;
}

}  // namespace tac
