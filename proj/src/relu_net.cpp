#include "tac/relu_net.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tac {

using nlohmann::json;

int64_t ReluNet::edge_count() const {
  int64_t n = 0;
  for (const auto& l : layers) n += static_cast<int64_t>(l.in_dim) * l.out_dim;
  return n;
}

void ReluNet::validate() const {
  if (layers.empty()) throw std::runtime_error("relu net: no layers");
  int prev = layers.front().in_dim;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.in_dim <= 0 || l.out_dim <= 0)
      throw std::runtime_error("relu net: non-positive layer dimension");
    if (l.in_dim != prev)
      throw std::runtime_error("relu net: layer " + std::to_string(i) +
                               " input dim does not match previous output dim");
    if ((int64_t)l.weights.size() != (int64_t)l.in_dim * l.out_dim)
      throw std::runtime_error("relu net: weight count mismatch in layer " + std::to_string(i));
    if ((int)l.bias.size() != l.out_dim)
      throw std::runtime_error("relu net: bias count mismatch in layer " + std::to_string(i));
    if (l.activation == Activation::Step && (int)l.step_thresholds.size() != l.out_dim)
      throw std::runtime_error("relu net: step layer needs one threshold per unit");
    prev = l.out_dim;
  }
}

std::vector<double> ReluNet::forward(const std::vector<double>& x) const {
  std::vector<double> cur = x;
  for (const auto& l : layers) {
    std::vector<double> next(l.out_dim);
    for (int j = 0; j < l.out_dim; ++j) {
      double z = l.bias[j];
      for (int i = 0; i < l.in_dim; ++i) z += l.weights[j * l.in_dim + i] * cur[i];
      switch (l.activation) {
        case Activation::Linear: next[j] = z; break;
        case Activation::Relu: next[j] = z >= 0.0 ? z : 0.0; break;
        case Activation::Step: next[j] = z >= l.step_thresholds[j] ? 1.0 : 0.0; break;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

namespace {

Activation activation_from_name(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "step") return Activation::Step;
  if (s == "linear") return Activation::Linear;
  throw std::runtime_error("relu net: unsupported activation '" + s + "'");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Step: return "step";
    case Activation::Linear: return "linear";
  }
  return "?";
}

}  // namespace

ReluNet load_relu_net(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("relu net parse error: ") + e.what());
  }
  ReluNet net;
  for (const auto& jl : doc.at("layers")) {
    ReluLayer l;
    l.in_dim = jl.at("in").get<int>();
    l.out_dim = jl.at("out").get<int>();
    l.activation = activation_from_name(jl.at("activation").get<std::string>());
    for (const auto& w : jl.at("weights")) l.weights.push_back(w.get<double>());
    for (const auto& b : jl.at("bias")) l.bias.push_back(b.get<double>());
    if (jl.contains("step_thresholds"))
      for (const auto& t : jl.at("step_thresholds")) l.step_thresholds.push_back(t.get<double>());
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

ReluNet load_relu_net_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open relu net file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_relu_net(ss.str());
}

std::string save_relu_net(const ReluNet& net) {
  json doc;
  doc["layers"] = json::array();
  for (const auto& l : net.layers) {
    json jl;
    jl["in"] = l.in_dim;
    jl["out"] = l.out_dim;
    jl["activation"] = activation_name(l.activation);
    jl["weights"] = l.weights;
    jl["bias"] = l.bias;
    if (!l.step_thresholds.empty()) jl["step_thresholds"] = l.step_thresholds;
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump(2);
}

}  // namespace tac
