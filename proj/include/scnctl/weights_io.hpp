#pragma once

#include <filesystem>
#include <string>

#include "scnctl/scn.hpp"

namespace scnctl {

// Self-describing JSON document:
//   {"format": "scn-weights", "version": 1, "mode": ..., "lambda": ...,
//    "gamma_x": ..., "gamma_z": ...,
//    "fields": {"<name>": {"rows": R, "cols": C, "data": [row-major]}}}
// Absent fields (empty matrices) are omitted. Doubles are written with
// round-trip precision.
std::string weights_to_json(const ScnWeights& w, int indent = 1);
ScnWeights weights_from_json(const std::string& text);

void export_weights(const ScnWeights& w, const std::filesystem::path& path);
ScnWeights import_weights(const std::filesystem::path& path);

}  // namespace scnctl
