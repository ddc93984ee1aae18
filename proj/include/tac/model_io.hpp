#pragma once

#include <string>

#include "tac/model.hpp"

namespace tac {

// Model file format: see docs/formats.md. Throws ModelError with a locus
// (field path or line) on malformed input.
TbnModel load_model(const std::string& text, bool auto_renormalize = false);
TbnModel load_model_file(const std::string& path, bool auto_renormalize = false);

std::string save_model(const TbnModel& model);
void save_model_file(const TbnModel& model, const std::string& path);

// Builder-style helpers used by tests and the experiment harness.
Cpt regular_cpt(VarId child, std::vector<VarId> parents, std::vector<double> entries);
Cpt testing_cpt(VarId child, std::vector<VarId> parents, std::vector<double> thresholds,
                std::vector<double> pos, std::vector<double> neg);

}  // namespace tac
