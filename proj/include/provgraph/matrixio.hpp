#pragma once

#include <string>
#include <vector>

namespace provgraph {

// On-disk form of an adjacency matrix:
//   {"kind":"visual"|"votes","ids":[...],"data":[[...]]}
struct MatrixDoc {
    std::string kind;
    std::vector<std::string> ids;
    std::vector<std::vector<int>> data;
};

std::string matrix_to_json(const MatrixDoc& doc);

// Parses and validates shape: square data, ids matching the dimension,
// non-negative entries. Kind-specific invariants are checked by the callers.
MatrixDoc matrix_from_json(const std::string& json_text);

}  // namespace provgraph
