#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "provgraph/datagen.hpp"
#include "provgraph/filtering.hpp"
#include "provgraph/heuristics.hpp"
#include "provgraph/scoring.hpp"
#include "provgraph/visual.hpp"

namespace provgraph {

enum class Protocol { oracle, end_to_end };
enum class Method { kruskal_metadata, cluster_visual, cluster_fused };

Protocol protocol_from_name(const std::string& name);
Method method_from_name(const std::string& name);

struct RunConfig {
    Protocol protocol = Protocol::oracle;
    Method method = Method::kruskal_metadata;
    HeuristicSet heuristics = HeuristicSet::all();
    size_t k = 100;
    int stages = 2;
    int theta = 8;
    std::string suite_dir;
    std::string index_path;  // required for end_to_end
    std::string out_dir;     // report + per-case outputs; empty = no files
    std::string posts_path;  // optional harvested-metadata fallback
    bool write_dot = false;
    bool undirected = false;
    DetectorConfig detector;
};

RunConfig run_config_from_json(const std::string& json_text);

struct LoadedAsset {
    std::string id;
    Raster raster;
    TagBundle bundle;
};

struct LoadedCase {
    std::string case_id;
    std::vector<LoadedAsset> assets;  // sorted by id
    ProvenanceGraph truth;
    std::string query_id;
};

// Reads <dir>/*.ppm|*.pgm with sibling .exif / .json metadata, truth.bam.json
// and query.txt. Assets without parseable embedded metadata fall back to the
// sidecar, then to an all-absent bundle (with a warning on stderr).
LoadedCase load_case_dir(const std::string& dir);

LoadedAsset load_asset(const std::string& raster_path);

// id -> raster path for every asset in the suite (cases + distractors).
std::map<std::string, std::string> suite_asset_paths(const std::string& suite_dir);

std::vector<std::string> suite_case_ids(const std::string& suite_dir);

IndexedImage describe_asset(const LoadedAsset& asset, const DetectorConfig& cfg);

// Builds the quantized index over every suite asset.
QuantizedIndex build_suite_index(const std::string& suite_dir, const PqConfig& pq,
                                 const DetectorConfig& detector);

struct CaseResult {
    std::string case_id;
    CaseScore score;
    ProvenanceGraph candidate;
};

CaseResult run_case(const RunConfig& cfg, const LoadedCase& c,
                    const std::map<std::string, std::string>& asset_paths,
                    const QuantizedIndex* index,
                    const std::map<std::string, TagBundle>* harvested);

// Runs every case in the suite under the configured protocol and method,
// writes report.json / report.txt (and per-case BAM / DOT) when out_dir is
// set, and returns the aggregated report. Reports are byte-stable for a
// fixed configuration and corpus.
SuiteReport run_suite(const RunConfig& cfg);

}  // namespace provgraph
