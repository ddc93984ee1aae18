#include "tac/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tac {

namespace targets {

using std::numbers::pi;

double f1(double x, double y) { return std::sin(pi * (1.0 - x) * (1.0 - y)); }

double f2(double x, double y) { return std::sin(pi / 2.0 * (2.0 - x - y)); }

double f3(double x, double y) {
  return 0.5 * std::exp(-5.0 * (x - 0.5) * (x - 0.5) - 5.0 * (y - 0.5) * (y - 0.5));
}

double f4(double /*x*/, double y) { return 1.0 / (1.0 + std::exp(-32.0 * (y - 0.5))); }

double f5(double x, double y) { return 0.5 * x * y * (x + y); }

double g1(double x, double /*y*/) { return 0.5 + 0.5 * std::sin(2.0 * pi * x); }

double g2(double x, double y) { return std::exp(std::sin(pi * (x + y)) - 1.0); }

}  // namespace targets

Target2d find_target(const std::string& name) {
  if (name == "f1") return targets::f1;
  if (name == "f2") return targets::f2;
  if (name == "f3") return targets::f3;
  if (name == "f4") return targets::f4;
  if (name == "f5") return targets::f5;
  if (name == "g1") return targets::g1;
  if (name == "g2") return targets::g2;
  throw std::runtime_error("unknown target function '" + name + "'");
}

std::vector<std::string> target_names() {
  return {"f1", "f2", "f3", "f4", "f5", "g1", "g2"};
}

}  // namespace tac
