#pragma once

#include <string>
#include <vector>

#include "tac/targets.hpp"

namespace tac {

// Labeled rows: one feature per (binary) evidence variable, in [0,1], plus
// a label in [0,1]. Feature j binds soft evidence (v, 1-v) on the variable
// named in feature_names[j].
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;

  size_t size() const { return rows.size(); }
};

// resolution^2 rows at grid coordinates i/(resolution-1); labels are
// f(x, y) clamped to [0,1]. resolution >= 2.
Dataset grid_dataset(const Target2d& f, int resolution,
                     std::vector<std::string> feature_names = {"E1", "E2"});

// CSV with a header row; the last column is the label, the others name
// evidence variables.
Dataset load_dataset_csv(const std::string& text);
Dataset load_dataset_file(const std::string& path);
std::string save_dataset_csv(const Dataset& d, const std::string& label_name = "label");

}  // namespace tac
