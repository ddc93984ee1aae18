#include "tac/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace tac {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Const: return "const";
    case NodeKind::Param: return "param";
    case NodeKind::Evidence: return "evidence";
    case NodeKind::Add: return "add";
    case NodeKind::Mul: return "mul";
    case NodeKind::Div: return "div";
    case NodeKind::Test: return "test";
    case NodeKind::Sigsel: return "sigsel";
  }
  return "?";
}

size_t CircuitBuilder::KeyHash::operator()(const Key& k) const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t x) {
    h ^= x;
    h *= 1099511628211ull;
  };
  mix(static_cast<uint64_t>(k.kind));
  mix(k.aux);
  mix(k.payload_bits);
  for (NodeId c : k.children) mix(c);
  return static_cast<size_t>(h);
}

NodeId CircuitBuilder::intern(NodeKind kind, uint32_t aux, double payload,
                              std::vector<NodeId> children) {
  for (NodeId c : children)
    if (c >= nodes_.size()) throw CircuitError("child handle out of range");

  Key key{kind, aux, std::bit_cast<uint64_t>(payload), children};
  if (dedup_) {
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
  }

  Node n;
  n.kind = kind;
  n.aux = aux;
  n.payload = payload;
  n.child_begin = static_cast<uint32_t>(children_.size());
  n.child_count = static_cast<uint32_t>(children.size());
  children_.insert(children_.end(), children.begin(), children.end());
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(n);
  if (dedup_) table_.emplace(std::move(key), id);
  return id;
}

NodeId CircuitBuilder::constant(double value) {
  return intern(NodeKind::Const, 0, value, {});
}

NodeId CircuitBuilder::param(const std::string& name, double init, bool trainable,
                             ParamRole role, const std::string& group, int state,
                             int group_size) {
  auto it = param_by_name_.find(name);
  if (it != param_by_name_.end()) return it->second;
  ParamInfo info;
  info.name = name;
  info.init = init;
  info.trainable = trainable;
  info.role = role;
  info.group = group;
  info.state = state;
  info.group_size = group_size;
  uint32_t idx = static_cast<uint32_t>(params_.size());
  NodeId id = intern(NodeKind::Param, idx, 0.0, {});
  info.node = id;
  params_.push_back(std::move(info));
  param_by_name_.emplace(name, id);
  return id;
}

NodeId CircuitBuilder::evidence(const std::string& var, int state, int var_card) {
  auto key = std::make_pair(var, state);
  auto it = evidence_by_slot_.find(key);
  if (it != evidence_by_slot_.end()) return it->second;
  uint32_t idx = static_cast<uint32_t>(evidence_.size());
  NodeId id = intern(NodeKind::Evidence, idx, 0.0, {});
  evidence_.push_back(EvidenceSlot{var, state, var_card, id});
  evidence_by_slot_.emplace(key, id);
  return id;
}

NodeId CircuitBuilder::add(std::vector<NodeId> children) {
  if (children.empty()) throw CircuitError("add with no children");
  if (children.size() == 1) return children[0];
  std::sort(children.begin(), children.end());
  return intern(NodeKind::Add, 0, 0.0, std::move(children));
}

NodeId CircuitBuilder::mul(std::vector<NodeId> children) {
  if (children.empty()) throw CircuitError("mul with no children");
  if (children.size() == 1) return children[0];
  std::sort(children.begin(), children.end());
  return intern(NodeKind::Mul, 0, 0.0, std::move(children));
}

NodeId CircuitBuilder::div(NodeId num, NodeId den) {
  return intern(NodeKind::Div, 0, 0.0, {num, den});
}

NodeId CircuitBuilder::test(NodeId x, NodeId t, NodeId pos, NodeId neg) {
  return intern(NodeKind::Test, 0, 0.0, {x, t, pos, neg});
}

NodeId CircuitBuilder::sigsel(NodeId x, NodeId t, NodeId pos, NodeId neg, double gamma) {
  if (!(gamma > 0.0)) throw CircuitError("sigsel needs gamma > 0");
  return intern(NodeKind::Sigsel, 0, gamma, {x, t, pos, neg});
}

Circuit CircuitBuilder::finish(std::vector<NodeId> outputs, std::string output_var,
                               std::vector<std::string> output_states) {
  if (outputs.empty()) throw CircuitError("circuit needs at least one output");

  // keep only what the outputs reach, in stable (already topological) order
  std::vector<bool> reach(nodes_.size(), false);
  std::vector<NodeId> stack = outputs;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (id >= nodes_.size()) throw CircuitError("output handle out of range");
    if (reach[id]) continue;
    reach[id] = true;
    const Node& n = nodes_[id];
    for (uint32_t i = 0; i < n.child_count; ++i) stack.push_back(children_[n.child_begin + i]);
  }

  Circuit c;
  std::vector<NodeId> remap(nodes_.size(), 0);
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (!reach[id]) continue;
    Node n = nodes_[id];
    uint32_t begin = static_cast<uint32_t>(c.children_.size());
    for (uint32_t i = 0; i < n.child_count; ++i)
      c.children_.push_back(remap[children_[n.child_begin + i]]);
    n.child_begin = begin;
    remap[id] = static_cast<NodeId>(c.nodes_.size());

    if (n.kind == NodeKind::Param) {
      ParamInfo info = params_[n.aux];
      info.node = remap[id];
      n.aux = static_cast<uint32_t>(c.params_.size());
      c.params_.push_back(std::move(info));
    } else if (n.kind == NodeKind::Evidence) {
      EvidenceSlot slot = evidence_[n.aux];
      slot.node = remap[id];
      n.aux = static_cast<uint32_t>(c.evidence_.size());
      c.evidence_.push_back(std::move(slot));
    }
    c.nodes_.push_back(n);
  }

  for (NodeId& o : outputs) o = remap[o];
  c.outputs_ = std::move(outputs);
  c.output_var_ = std::move(output_var);
  c.output_states_ = std::move(output_states);
  c.index_manifest();
  return c;
}

void Circuit::index_manifest() {
  evidence_by_var_.clear();
  for (uint32_t i = 0; i < evidence_.size(); ++i) {
    const EvidenceSlot& s = evidence_[i];
    auto& slots = evidence_by_var_[s.var];
    if (slots.empty()) slots.assign(s.var_card, kNoSlot);
    slots[s.state] = i;
  }
}

int Circuit::param_index(const std::string& name) const {
  for (size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

void Circuit::set_param_inits(const std::vector<double>& by_index) {
  if (by_index.size() != params_.size())
    throw CircuitError("set_param_inits: wrong length");
  for (size_t i = 0; i < params_.size(); ++i) params_[i].init = by_index[i];
}

CircuitStats Circuit::stats() const {
  CircuitStats s;
  s.nodes = static_cast<int64_t>(nodes_.size());
  std::vector<int> depth(nodes_.size(), 0);
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    s.kind_counts[node_kind_name(n.kind)]++;
    s.edges += n.child_count;
    int d = 0;
    for (uint32_t i = 0; i < n.child_count; ++i)
      d = std::max(d, depth[children_[n.child_begin + i]] + 1);
    depth[id] = d;
    s.depth = std::max(s.depth, d);
  }
  s.param_leaves = static_cast<int64_t>(params_.size());
  s.evidence_leaves = static_cast<int64_t>(evidence_.size());
  return s;
}

}  // namespace tac
