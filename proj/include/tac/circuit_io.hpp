#pragma once

#include <string>

#include "tac/circuit.hpp"

namespace tac {

// Circuit file format: see docs/formats.md. Round trips losslessly and
// preserves topological order.
std::string serialize_circuit(const Circuit& c);
Circuit deserialize_circuit(const std::string& text);

Circuit load_circuit_file(const std::string& path);
void save_circuit_file(const Circuit& c, const std::string& path);

}  // namespace tac
