#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tac/circuit.hpp"
#include "tac/elimination.hpp"
#include "tac/factor.hpp"
#include "tac/model.hpp"

namespace tac {

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SelectionMode : uint8_t { Threshold, Sigmoid };

struct CompileRequest {
  VarId query = kNoVar;
  std::vector<VarId> evidence_vars;
  SelectionMode mode = SelectionMode::Threshold;
  double gamma = 16.0;  // sigmoid slope, sigmoid mode only
  bool dedup = true;    // unique-node table; off only for experiments/tests
  bool prune = true;
};

// Compiles a TBN query to a TAC (or a BN query to an AC) by keeping a
// symbolic trace of factor elimination. Phases are public so tests can
// inspect the intermediate node structure.
class QueryCompiler {
 public:
  QueryCompiler(const TbnModel& model, const CompileRequest& req);

  Circuit compile();  // runs all phases

  // Individual phases, in call order.
  void init_leaves();
  void enter_evidence();
  void run_selection();
  void flatten_testing(VarId x);  // selection for one testing node
  Factor<NodeId> run_inference();

  const TbnModel& working_model() const { return model_; }
  CircuitBuilder& builder() { return builder_; }
  // CPT factor for a variable of the working model (after the phases that
  // touch it have run). Testing CPTs have no factor until flattened.
  const Factor<NodeId>& cpt_factor(VarId v) const;
  bool flattened(VarId v) const { return per_var_[v].has_factor; }

  // Leaf handles, for structural assertions.
  NodeId threshold_leaf(VarId v, int parent_state) const;
  NodeId lambda_leaf(VarId v, int state) const;

 private:
  struct PerVar {
    bool has_factor = false;
    Factor<NodeId> factor;
    std::vector<NodeId> thresholds;       // per parent state (testing only)
    std::vector<NodeId> pos, neg;         // per (parent state, child state)
    std::vector<NodeId> pending_lambda;   // evidence to apply after flattening
    std::vector<NodeId> lambdas;
  };

  Factor<NodeId> make_regular_factor(VarId v, const std::vector<NodeId>& entry_nodes);
  std::string row_label(VarId v, int64_t u) const;

  TbnModel model_;  // pruned working copy
  CompileRequest req_;
  CircuitBuilder builder_;
  std::vector<PerVar> per_var_;
  bool leaves_done_ = false;
  bool evidence_done_ = false;
  bool selection_done_ = false;
};

Circuit compile_query(const TbnModel& model, const CompileRequest& req);

// Name helpers shared with the trainer and tests; these define the
// parameter naming scheme of compiled circuits.
std::string param_name(const TbnModel& m, VarId v, int64_t u, int state, char polarity);
std::string threshold_name(const TbnModel& m, VarId v, int64_t u);

}  // namespace tac
