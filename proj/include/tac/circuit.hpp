#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tac {

using NodeId = uint32_t;

struct CircuitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class NodeKind : uint8_t {
  Const,     // payload = value
  Param,     // aux = param index
  Evidence,  // aux = evidence slot index
  Add,       // n-ary
  Mul,       // n-ary
  Div,       // children (num, den); den guarded at 1e-300
  Test,      // children (x, t, pos, neg): x >= t ? pos : neg
  Sigsel,    // children (x, t, pos, neg), payload = gamma
};

const char* node_kind_name(NodeKind k);

enum class ParamRole : uint8_t { Prob, PosProb, NegProb, Threshold };

struct ParamInfo {
  std::string name;
  double init = 0.5;
  bool trainable = true;
  ParamRole role = ParamRole::Prob;
  // Parameters of one distribution row share a group; `state` is the
  // position within the row and `group_size` the row width. Thresholds are
  // groups of size 1.
  std::string group;
  int state = 0;
  int group_size = 1;
  NodeId node = 0;
};

struct EvidenceSlot {
  std::string var;
  int state = 0;
  int var_card = 2;
  NodeId node = 0;
};

struct Node {
  NodeKind kind = NodeKind::Const;
  uint32_t aux = 0;
  uint32_t child_begin = 0;
  uint32_t child_count = 0;
  double payload = 0.0;
};

struct CircuitStats {
  std::map<std::string, int64_t> kind_counts;
  int64_t nodes = 0;
  int64_t edges = 0;
  int depth = 0;
  int64_t param_leaves = 0;
  int64_t evidence_leaves = 0;
};

// Hash-consed DAG in topological storage order (children precede parents).
// Immutable after CircuitBuilder::finish.
class Circuit {
 public:
  size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const NodeId> children(NodeId id) const {
    const Node& n = nodes_[id];
    return {children_.data() + n.child_begin, n.child_count};
  }

  const std::vector<ParamInfo>& params() const { return params_; }
  const std::vector<EvidenceSlot>& evidence_slots() const { return evidence_; }
  const std::vector<NodeId>& outputs() const { return outputs_; }
  const std::string& output_var() const { return output_var_; }
  const std::vector<std::string>& output_states() const { return output_states_; }

  // Slot indices per evidence variable, in state order (kNoSlot if absent).
  const std::map<std::string, std::vector<uint32_t>>& evidence_vars() const {
    return evidence_by_var_;
  }
  static constexpr uint32_t kNoSlot = UINT32_MAX;

  int param_index(const std::string& name) const;  // -1 if absent

  // Overwrites the parameters' initial values (e.g. after training); the
  // structure and manifest are unchanged.
  void set_param_inits(const std::vector<double>& by_index);

  CircuitStats stats() const;

 private:
  friend class CircuitBuilder;
  friend Circuit deserialize_circuit(const std::string&);

  void index_manifest();

  std::vector<Node> nodes_;
  std::vector<NodeId> children_;
  std::vector<ParamInfo> params_;
  std::vector<EvidenceSlot> evidence_;
  std::vector<NodeId> outputs_;
  std::string output_var_;
  std::vector<std::string> output_states_;
  std::map<std::string, std::vector<uint32_t>> evidence_by_var_;
};

// Builds circuits bottom-up with structural sharing: interning returns the
// existing node on a structural match. Add/mul children are canonically
// sorted before interning; test/sigsel/div operands are positional.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(bool dedup = true) : dedup_(dedup) {}

  NodeId constant(double value);
  NodeId param(const std::string& name, double init, bool trainable,
               ParamRole role = ParamRole::Prob, const std::string& group = "",
               int state = 0, int group_size = 1);
  NodeId evidence(const std::string& var, int state, int var_card);
  NodeId add(std::vector<NodeId> children);
  NodeId mul(std::vector<NodeId> children);
  NodeId mul2(NodeId a, NodeId b) { return mul({a, b}); }
  NodeId div(NodeId num, NodeId den);
  NodeId test(NodeId x, NodeId t, NodeId pos, NodeId neg);
  NodeId sigsel(NodeId x, NodeId t, NodeId pos, NodeId neg, double gamma);

  size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const NodeId> children(NodeId id) const {
    const Node& n = nodes_[id];
    return {children_.data() + n.child_begin, n.child_count};
  }

  // Compacts to the nodes reachable from `outputs` (stable order) and
  // freezes. The builder must not be used afterwards.
  Circuit finish(std::vector<NodeId> outputs, std::string output_var = "",
                 std::vector<std::string> output_states = {});

 private:
  struct Key {
    NodeKind kind;
    uint32_t aux;
    uint64_t payload_bits;
    std::vector<NodeId> children;
    bool operator==(const Key& o) const {
      return kind == o.kind && aux == o.aux && payload_bits == o.payload_bits &&
             children == o.children;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };

  NodeId intern(NodeKind kind, uint32_t aux, double payload, std::vector<NodeId> children);

  bool dedup_;
  std::vector<Node> nodes_;
  std::vector<NodeId> children_;
  std::vector<ParamInfo> params_;
  std::vector<EvidenceSlot> evidence_;
  std::unordered_map<Key, NodeId, KeyHash> table_;
  std::unordered_map<std::string, NodeId> param_by_name_;
  std::map<std::pair<std::string, int>, NodeId> evidence_by_slot_;
};

}  // namespace tac
