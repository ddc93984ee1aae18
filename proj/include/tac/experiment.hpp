#pragma once

#include <string>
#include <vector>

#include "tac/circuit.hpp"
#include "tac/compiler.hpp"
#include "tac/dataset.hpp"
#include "tac/model.hpp"
#include "tac/trainer.hpp"

namespace tac {

// One function-fitting experiment: build the TBN, compile the sigmoid TAC
// and the regular-CPT AC baseline, train both over several seeds, report
// MSEs and an evaluation surface.
struct ExperimentConfig {
  std::string id = "f1";        // f1..f5, g1, g2
  int n_testing = 4;            // testing nodes T1..Tk
  int grid_resolution = 32;     // training grid (resolution^2 rows)
  int surface_resolution = 32;  // surface CSV has (res+1)^2 rows
  double gamma = 16.0;
  int seeds = 3;
  uint64_t base_seed = 1;
  // "tree": T1..Tk feed Q through a binary tree of regular nodes (constant
  // treewidth, any k). "flat": Q is a direct child of all of T1..Tk
  // (2^k-row CPT; small k only).
  std::string structure = "tree";
  TrainConfig trainer;
  bool run_ac_baseline = true;
  std::string outdir;  // empty: nothing written
};

struct RunMetrics {
  uint64_t seed = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;  // validation split at the best epoch
  double grid_mse = 0.0;  // full training grid
  int best_epoch = -1;
  int epochs = 0;
  bool diverged = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunMetrics> tac_runs, ac_runs;
  int tac_best = -1, ac_best = -1;  // index of best run by test_mse
  Circuit tac_circuit, ac_circuit;  // trained circuits of the best runs
  CircuitStats tac_stats, ac_stats;

  double tac_best_mse() const { return tac_runs[tac_best].test_mse; }
  double ac_best_mse() const { return ac_runs.empty() ? 0.0 : ac_runs[ac_best].test_mse; }
};

// E1, E2 parents of every T_j; Q aggregates the T_j. testing=false builds
// the AC baseline (same structure, regular CPTs everywhere).
TbnModel build_experiment_tbn(int n_testing, bool testing, const std::string& structure);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// metrics.json plus one surface CSV (x,y,f,learned) per trained model.
void write_experiment_outputs(const ExperimentResult& result);

}  // namespace tac
