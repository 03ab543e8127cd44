#include "provgraph/matrixio.hpp"

#include <json.hpp>

#include "provgraph/common.hpp"

namespace provgraph {

using nlohmann::json;

std::string matrix_to_json(const MatrixDoc& doc) {
    json j;
    j["kind"] = doc.kind;
    j["ids"] = doc.ids;
    j["data"] = doc.data;
    return j.dump(1);
}

MatrixDoc matrix_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("unparseable matrix document: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("ids") || !j.contains("data"))
        throw SchemaError("matrix document needs kind, ids and data");

    MatrixDoc doc;
    if (!j["kind"].is_string()) throw SchemaError("kind must be a string");
    doc.kind = j["kind"].get<std::string>();

    if (!j["ids"].is_array()) throw SchemaError("ids must be an array");
    for (const auto& id : j["ids"]) {
        if (!id.is_string()) throw SchemaError("ids must be strings");
        doc.ids.push_back(id.get<std::string>());
    }

    const auto& data = j["data"];
    if (!data.is_array() || data.size() != doc.ids.size())
        throw SchemaError("data must be a square array matching ids");
    for (const auto& row : data) {
        if (!row.is_array() || row.size() != doc.ids.size())
            throw SchemaError("data must be a square array matching ids");
        std::vector<int> r;
        for (const auto& cell : row) {
            if (!cell.is_number_integer()) throw SchemaError("matrix entries must be integers");
            int64_t v = cell.get<int64_t>();
            if (v < 0) throw NegativeWeight("matrix entries must be non-negative");
            r.push_back(static_cast<int>(v));
        }
        doc.data.push_back(std::move(r));
    }
    return doc;
}

}  // namespace provgraph
