#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tac/batch.hpp"
#include "tac/circuit.hpp"
#include "tac/dataset.hpp"

namespace tac {

struct TrainError : std::runtime_error {
  explicit TrainError(const std::string& what, int epoch_ = -1)
      : std::runtime_error(what), epoch(epoch_) {}
  int epoch;
};

enum class OptimizerKind : uint8_t { Adam, Sgd };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::Adam;
  double lr = 0.01;
  int batch_size = 64;
  int epochs = 2000;
  uint64_t seed = 0;
  double validation_fraction = 0.1;
  Backend backend = select_backend();
};

struct TrainResult {
  std::vector<double> train_loss;  // per epoch (mean over batches)
  std::vector<double> val_loss;    // per epoch; empty if no split
  double best_val = 0.0;
  int best_epoch = -1;
  double final_train = 0.0;
};

// Batched forward evaluation with the circuit's stored parameter values;
// returns the posterior of the first output state per row. Feature j binds
// soft evidence (v, 1-v) on the variable named feature_names[j].
std::vector<double> predict_rows(const Circuit& c,
                                 const std::vector<std::string>& feature_names,
                                 const std::vector<std::vector<double>>& rows,
                                 Backend backend = select_backend());

// Learns circuit parameters and thresholds from labeled data by minimizing
// mean squared error on the normalized output of the query's first state.
//
// Parameters are optimized through meta-parameters that keep every
// distribution row normalized: binary rows use a logistic pair
// (theta = sigmoid(tau), 1 - sigmoid(tau)), wider rows a softmax, and
// thresholds a plain sigmoid. Meta-parameters are initialized uniform
// (-0.5, 0.5) from the seed.
class TrainSession {
 public:
  TrainSession(const Circuit& circuit, Dataset data, TrainConfig cfg);

  // Fixes a parameter leaf at a value. The leaf's whole distribution row
  // drops out of training (unfixed row members keep their compiled values).
  // Call before train().
  void freeze(const std::string& param_name, double value);

  TrainResult train();

  // MSE of the current bindings over a dataset (exact Appendix-A formula).
  double mse(const Dataset& d);
  double predict(const std::vector<double>& row);

  const std::vector<double>& realized_params();
  const std::vector<double>& metas() const { return metas_; }
  Circuit trained_circuit();  // realized values baked in as initials

 private:
  struct Group {
    enum class Kind : uint8_t { Logistic, Softmax, Threshold } kind;
    std::vector<int> params;  // param indices by state order
    int meta_begin = 0;
    int meta_count = 0;
  };

  void build_groups();
  void realize();
  void pull_back(const std::vector<double>& param_grads, std::vector<double>& meta_grads);
  // forward/backward over [begin,end) of `order`; returns summed squared
  // error; accumulates raw parameter gradients when grads != nullptr
  double run_span(const std::vector<int>& order, size_t begin, size_t end,
                  std::vector<double>* grads);

  const Circuit* circuit_;
  Dataset data_;
  TrainConfig cfg_;
  BatchContext batch_;

  std::vector<std::pair<uint32_t, uint32_t>> feature_slots_;  // (state0, state1)
  std::vector<Group> groups_;
  std::vector<double> metas_;
  std::vector<double> frozen_values_;  // by param index; NaN when not frozen
  std::vector<double> realized_;
  bool realized_dirty_ = true;

  std::vector<int> train_idx_, val_idx_;
  uint64_t rng_state_;
};

}  // namespace tac
