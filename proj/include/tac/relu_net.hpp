#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tac {

enum class Activation { Relu, Step, Linear };

struct ReluLayer {
  // weights is out_dim x in_dim, row-major; bias has out_dim entries.
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::Relu;
  // step threshold per unit; only read when activation == Step
  std::vector<double> step_thresholds;
};

struct ReluNet {
  std::vector<ReluLayer> layers;

  int input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
  int64_t edge_count() const;

  void validate() const;  // throws std::runtime_error on dimension mismatch
  std::vector<double> forward(const std::vector<double>& x) const;
};

ReluNet load_relu_net(const std::string& text);
ReluNet load_relu_net_file(const std::string& path);
std::string save_relu_net(const ReluNet& net);

}  // namespace tac
