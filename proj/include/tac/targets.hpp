#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tac {

// Benchmark target functions over [0,1]^2 -> [0,1].
namespace targets {

double f1(double x, double y);  // sin(pi (1-x)(1-y))
double f2(double x, double y);  // sin(pi/2 (2-x-y))
double f3(double x, double y);  // 1/2 exp(-5(x-1/2)^2 - 5(y-1/2)^2)
double f4(double x, double y);  // logistic(32(y-1/2))
double f5(double x, double y);  // 1/2 xy(x+y)
double g1(double x, double y);  // 1/2 + 1/2 sin(2 pi x)
double g2(double x, double y);  // exp(sin(pi(x+y)) - 1)

}  // namespace targets

using Target2d = std::function<double(double, double)>;

// Lookup by experiment id ("f1".."f5", "g1", "g2"); throws on unknown names.
Target2d find_target(const std::string& name);
std::vector<std::string> target_names();

}  // namespace tac
