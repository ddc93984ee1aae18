#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tac {

using VarId = uint32_t;
constexpr VarId kNoVar = UINT32_MAX;

// Tolerance for "this distribution sums to 1" checks on model files and
// evidence vectors.
constexpr double kRowSumTol = 1e-9;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Variable {
  std::string name;
  std::vector<std::string> states;  // ordered; order is significant

  int card() const { return static_cast<int>(states.size()); }
};

enum class CptKind : uint8_t { Regular, Testing };

// One CPT, dense row-major: parent instantiation (mixed-radix, last parent
// fastest) indexes the row, child state indexes within the row.
//
// Regular CPTs fill `entries` (size = n_parent_states * child_card).
// Testing CPTs fill `thresholds` (one per parent state) plus `pos_entries`
// and `neg_entries` (same layout as `entries`).
struct Cpt {
  VarId child = kNoVar;
  std::vector<VarId> parents;  // ordered
  CptKind kind = CptKind::Regular;

  std::vector<double> entries;
  std::vector<double> thresholds;
  std::vector<double> pos_entries;
  std::vector<double> neg_entries;

  bool testing() const { return kind == CptKind::Testing; }
};

// Soft evidence: one likelihood vector per evidence variable, aligned with
// the variable's state order and normalized to sum 1.
struct Evidence {
  std::map<VarId, std::vector<double>> likelihoods;

  bool has(VarId v) const { return likelihoods.count(v) != 0; }
};

struct ParamCounts {
  int64_t static_params = 0;
  int64_t dynamic_params = 0;
  int64_t thresholds = 0;
};

// A DAG of variables plus one CPT per variable. A BN is a TbnModel with no
// testing CPTs. Immutable once validated.
class TbnModel {
 public:
  TbnModel() = default;
  TbnModel(std::vector<Variable> variables, std::vector<Cpt> cpts,
           bool auto_renormalize = false);

  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& var(VarId v) const { return vars_[v]; }
  const Cpt& cpt(VarId v) const { return cpts_[v]; }
  size_t size() const { return vars_.size(); }

  std::optional<VarId> find(const std::string& name) const;
  VarId require(const std::string& name) const;

  const std::vector<VarId>& parents(VarId v) const { return cpts_[v].parents; }
  const std::vector<VarId>& children(VarId v) const { return children_[v]; }
  const std::vector<VarId>& topo_order() const { return topo_; }

  // Ancestors of v (not including v), as a sorted list.
  std::vector<VarId> ancestors(VarId v) const;

  bool is_testing(VarId v) const { return cpts_[v].testing(); }
  bool has_testing() const { return testing_count_ > 0; }
  int testing_count() const { return testing_count_; }

  int n_parent_states(VarId v) const;

  ParamCounts parameter_count() const;

  // Removes, to a fixed point, every leaf that is neither the query nor an
  // evidence variable. Query answers are unchanged.
  TbnModel prune_for_query(VarId query, const std::vector<VarId>& evidence_vars) const;

  bool structurally_equal(const TbnModel& other) const;

  void validate_evidence(const Evidence& ev) const;

 private:
  void validate(bool auto_renormalize);

  std::vector<Variable> vars_;
  std::vector<Cpt> cpts_;
  std::vector<std::vector<VarId>> children_;
  std::vector<VarId> topo_;
  int testing_count_ = 0;
};

// Mixed-radix index helpers shared by CPTs and factors: the LAST variable in
// `cards` varies fastest.
int64_t mixed_radix_size(const std::vector<int>& cards);
int64_t mixed_radix_index(const std::vector<int>& cards, const std::vector<int>& digits);
void mixed_radix_decode(const std::vector<int>& cards, int64_t index, std::vector<int>& digits);

}  // namespace tac
