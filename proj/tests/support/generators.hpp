#pragma once

#include <random>
#include <vector>

#include "tac/model.hpp"

namespace tac::testgen {

struct ModelOptions {
  int max_nodes = 8;
  int min_nodes = 2;
  int max_states = 3;
  int max_parents = 3;
  int max_testing = 0;  // 0 builds a BN
};

// Random DAG with dense CPT rows (normalized uniforms). Testing nodes are
// drawn among non-roots.
TbnModel random_model(std::mt19937_64& rng, const ModelOptions& opt = {});

// Random soft evidence on a subset of variables (never the given query).
Evidence random_evidence(std::mt19937_64& rng, const TbnModel& m, VarId query,
                         int max_vars = 3);
std::vector<VarId> evidence_vars(const Evidence& ev);

double unit(std::mt19937_64& rng);  // uniform [0,1)

}  // namespace tac::testgen
