#include "tac/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tac {

Dataset grid_dataset(const Target2d& f, int resolution, std::vector<std::string> names) {
  if (resolution < 2) throw std::runtime_error("grid_dataset: resolution must be >= 2");
  Dataset d;
  d.feature_names = std::move(names);
  const double step = 1.0 / (resolution - 1);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      double x = i * step, y = j * step;
      d.rows.push_back({x, y});
      d.labels.push_back(std::clamp(f(x, y), 0.0, 1.0));
    }
  return d;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Dataset load_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset: empty file");

  Dataset d;
  auto header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("dataset: need features and a label column");
  d.feature_names.assign(header.begin(), header.end() - 1);

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("dataset: line " + std::to_string(lineno) +
                               " has wrong column count");
    std::vector<double> row;
    for (size_t i = 0; i < cells.size(); ++i) {
      double v;
      try {
        v = std::stod(cells[i]);
      } catch (...) {
        throw std::runtime_error("dataset: line " + std::to_string(lineno) +
                                 ", column " + std::to_string(i + 1) + ": not a number");
      }
      if (!(v >= 0.0 && v <= 1.0))
        throw std::runtime_error("dataset: line " + std::to_string(lineno) +
                                 ": value outside [0,1]");
      if (i + 1 < cells.size())
        row.push_back(v);
      else
        d.labels.push_back(v);
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

Dataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_dataset_csv(ss.str());
}

std::string save_dataset_csv(const Dataset& d, const std::string& label_name) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& n : d.feature_names) out << n << ",";
  out << label_name << "\n";
  for (size_t r = 0; r < d.rows.size(); ++r) {
    for (double v : d.rows[r]) out << v << ",";
    out << d.labels[r] << "\n";
  }
  return out.str();
}

}  // namespace tac
