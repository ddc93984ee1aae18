#include "tac/circuit_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tac {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

NodeKind kind_from_name(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(NodeKind::Sigsel); ++k)
    if (s == node_kind_name(static_cast<NodeKind>(k))) return static_cast<NodeKind>(k);
  throw CircuitError("unknown node kind '" + s + "'");
}

const char* role_name(ParamRole r) {
  switch (r) {
    case ParamRole::Prob: return "prob";
    case ParamRole::PosProb: return "pos";
    case ParamRole::NegProb: return "neg";
    case ParamRole::Threshold: return "threshold";
  }
  return "?";
}

ParamRole role_from_name(const std::string& s) {
  if (s == "prob") return ParamRole::Prob;
  if (s == "pos") return ParamRole::PosProb;
  if (s == "neg") return ParamRole::NegProb;
  if (s == "threshold") return ParamRole::Threshold;
  throw CircuitError("unknown param role '" + s + "'");
}

}  // namespace

std::string serialize_circuit(const Circuit& c) {
  json doc;
  doc["format"] = "tac-circuit";
  doc["version"] = kFormatVersion;

  json params = json::array();
  for (const auto& p : c.params())
    params.push_back({{"name", p.name},
                      {"init", p.init},
                      {"trainable", p.trainable},
                      {"role", role_name(p.role)},
                      {"group", p.group},
                      {"state", p.state},
                      {"group_size", p.group_size},
                      {"node", p.node}});
  doc["params"] = std::move(params);

  json ev = json::array();
  for (const auto& s : c.evidence_slots())
    ev.push_back({{"var", s.var}, {"state", s.state}, {"var_card", s.var_card}, {"node", s.node}});
  doc["evidence"] = std::move(ev);

  json nodes = json::array();
  for (NodeId id = 0; id < c.node_count(); ++id) {
    const Node& n = c.node(id);
    json jn = json::array();
    jn.push_back(id);
    jn.push_back(node_kind_name(n.kind));
    if (n.kind == NodeKind::Const || n.kind == NodeKind::Sigsel)
      jn.push_back(n.payload);
    else if (n.kind == NodeKind::Param || n.kind == NodeKind::Evidence)
      jn.push_back(n.aux);
    else
      jn.push_back(nullptr);
    for (NodeId ch : c.children(id)) jn.push_back(ch);
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);

  doc["outputs"] = c.outputs();
  doc["output_var"] = c.output_var();
  doc["output_states"] = c.output_states();
  return doc.dump();
}

Circuit deserialize_circuit(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CircuitError(std::string("circuit parse error: ") + e.what());
  }
  if (doc.value("format", std::string()) != "tac-circuit")
    throw CircuitError("not a circuit file");
  if (doc.value("version", -1) != kFormatVersion)
    throw CircuitError("unsupported circuit file version");

  Circuit c;
  for (const auto& jp : doc.at("params")) {
    ParamInfo p;
    p.name = jp.at("name").get<std::string>();
    p.init = jp.at("init").get<double>();
    p.trainable = jp.at("trainable").get<bool>();
    p.role = role_from_name(jp.at("role").get<std::string>());
    p.group = jp.at("group").get<std::string>();
    p.state = jp.at("state").get<int>();
    p.group_size = jp.at("group_size").get<int>();
    p.node = jp.at("node").get<NodeId>();
    c.params_.push_back(std::move(p));
  }
  for (const auto& js : doc.at("evidence")) {
    EvidenceSlot s;
    s.var = js.at("var").get<std::string>();
    s.state = js.at("state").get<int>();
    s.var_card = js.at("var_card").get<int>();
    s.node = js.at("node").get<NodeId>();
    c.evidence_.push_back(std::move(s));
  }

  const auto& jnodes = doc.at("nodes");
  for (size_t i = 0; i < jnodes.size(); ++i) {
    const auto& jn = jnodes[i];
    if (!jn.is_array() || jn.size() < 3) throw CircuitError("malformed node entry");
    if (jn[0].get<size_t>() != i) throw CircuitError("node ids must be sequential");
    Node n;
    n.kind = kind_from_name(jn[1].get<std::string>());
    if (n.kind == NodeKind::Const || n.kind == NodeKind::Sigsel)
      n.payload = jn[2].is_null() ? 0.0 : jn[2].get<double>();
    else if (n.kind == NodeKind::Param || n.kind == NodeKind::Evidence)
      n.aux = jn[2].get<uint32_t>();
    n.child_begin = static_cast<uint32_t>(c.children_.size());
    n.child_count = static_cast<uint32_t>(jn.size() - 3);
    for (size_t k = 3; k < jn.size(); ++k) {
      NodeId ch = jn[k].get<NodeId>();
      if (ch >= i)
        throw CircuitError("node " + std::to_string(i) +
                           " references child " + std::to_string(ch) +
                           " that does not precede it");
      c.children_.push_back(ch);
    }

    switch (n.kind) {
      case NodeKind::Test:
      case NodeKind::Sigsel:
        if (n.child_count != 4) throw CircuitError("test/sigsel need 4 operands");
        break;
      case NodeKind::Div:
        if (n.child_count != 2) throw CircuitError("div needs 2 operands");
        break;
      case NodeKind::Const:
      case NodeKind::Param:
      case NodeKind::Evidence:
        if (n.child_count != 0) throw CircuitError("leaf node with children");
        if (n.kind == NodeKind::Param && n.aux >= c.params_.size())
          throw CircuitError("param node with dangling manifest index");
        if (n.kind == NodeKind::Evidence && n.aux >= c.evidence_.size())
          throw CircuitError("evidence node with dangling manifest index");
        break;
      default:
        if (n.child_count < 2) throw CircuitError("add/mul need at least 2 children");
        break;
    }
    c.nodes_.push_back(n);
  }

  for (const auto& jo : doc.at("outputs")) {
    NodeId o = jo.get<NodeId>();
    if (o >= c.nodes_.size()) throw CircuitError("dangling output handle");
    c.outputs_.push_back(o);
  }
  if (c.outputs_.empty()) throw CircuitError("circuit needs at least one output");
  c.output_var_ = doc.value("output_var", std::string());
  for (const auto& s : doc.value("output_states", json::array()))
    c.output_states_.push_back(s.get<std::string>());

  for (const auto& p : c.params_)
    if (p.node >= c.nodes_.size() || c.nodes_[p.node].kind != NodeKind::Param)
      throw CircuitError("param manifest entry does not point at a param node");
  for (const auto& s : c.evidence_)
    if (s.node >= c.nodes_.size() || c.nodes_[s.node].kind != NodeKind::Evidence)
      throw CircuitError("evidence manifest entry does not point at an evidence node");

  c.index_manifest();
  return c;
}

Circuit load_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CircuitError("cannot open circuit file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_circuit(ss.str());
}

void save_circuit_file(const Circuit& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CircuitError("cannot write circuit file '" + path + "'");
  out << serialize_circuit(c) << "\n";
}

}  // namespace tac
