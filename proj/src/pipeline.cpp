#include "provgraph/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "provgraph/common.hpp"
#include "provgraph/exif.hpp"
#include "provgraph/matrixio.hpp"
#include "provgraph/parallel.hpp"
#include "provgraph/sidecar.hpp"

namespace provgraph {

namespace fs = std::filesystem;
using nlohmann::json;

Protocol protocol_from_name(const std::string& name) {
    if (name == "oracle") return Protocol::oracle;
    if (name == "end_to_end") return Protocol::end_to_end;
    throw ConfigError("unknown protocol: " + name);
}

Method method_from_name(const std::string& name) {
    if (name == "kruskal_metadata") return Method::kruskal_metadata;
    if (name == "cluster_visual") return Method::cluster_visual;
    if (name == "cluster_fused") return Method::cluster_fused;
    throw ConfigError("unknown method: " + name);
}

RunConfig run_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparseable config: ") + e.what());
    }
    RunConfig cfg;
    if (j.contains("protocol")) cfg.protocol = protocol_from_name(j["protocol"].get<std::string>());
    if (j.contains("method")) cfg.method = method_from_name(j["method"].get<std::string>());
    if (j.contains("heuristics"))
        cfg.heuristics = heuristic_set_from_names(j["heuristics"].get<std::vector<std::string>>());
    if (j.contains("k")) cfg.k = j["k"].get<size_t>();
    if (j.contains("stages")) cfg.stages = j["stages"].get<int>();
    if (j.contains("theta")) cfg.theta = j["theta"].get<int>();
    if (j.contains("suite")) cfg.suite_dir = j["suite"].get<std::string>();
    if (j.contains("index")) cfg.index_path = j["index"].get<std::string>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("posts")) cfg.posts_path = j["posts"].get<std::string>();
    if (j.contains("dot")) cfg.write_dot = j["dot"].get<bool>();
    if (j.contains("undirected")) cfg.undirected = j["undirected"].get<bool>();
    if (j.contains("seed")) cfg.detector.seed = j["seed"].get<uint64_t>();
    if (j.contains("max_keypoints")) cfg.detector.max_keypoints = j["max_keypoints"].get<int>();
    return cfg;
}

LoadedAsset load_asset(const std::string& raster_path) {
    LoadedAsset a;
    fs::path p(raster_path);
    a.id = p.stem().string();
    a.raster = load_pnm(raster_path);

    fs::path exif_path = p;
    exif_path.replace_extension(".exif");
    fs::path json_path = p;
    json_path.replace_extension(".json");

    bool have_embedded = false;
    if (fs::exists(exif_path)) {
        try {
            a.bundle = parse_exif(read_file(exif_path.string()));
            have_embedded = true;
        } catch (const MalformedContainer& e) {
            std::cerr << "warning: " << exif_path.string() << ": " << e.what()
                      << " (treating as all-absent)\n";
        }
    }
    if (fs::exists(json_path)) {
        auto bytes = read_file(json_path.string());
        TagBundle sidecar = load_sidecar(std::string(bytes.begin(), bytes.end()));
        a.bundle = have_embedded ? merge_bundles(a.bundle, sidecar) : sidecar;
    }
    return a;
}

LoadedCase load_case_dir(const std::string& dir) {
    LoadedCase c;
    c.case_id = fs::path(dir).filename().string();

    std::vector<std::string> raster_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") raster_files.push_back(entry.path().string());
    }
    std::sort(raster_files.begin(), raster_files.end());
    for (const auto& f : raster_files) c.assets.push_back(load_asset(f));

    auto truth_bytes = read_file(dir + "/truth.bam.json");
    auto [bam, ids] = bam_from_json(std::string(truth_bytes.begin(), truth_bytes.end()));
    c.truth = from_bam(bam, ids);

    auto query_bytes = read_file(dir + "/query.txt");
    c.query_id = std::string(query_bytes.begin(), query_bytes.end());
    while (!c.query_id.empty() && (c.query_id.back() == '\n' || c.query_id.back() == '\r'))
        c.query_id.pop_back();
    return c;
}

std::vector<std::string> suite_case_ids(const std::string& suite_dir) {
    auto bytes = read_file(suite_dir + "/manifest.json");
    json manifest = json::parse(std::string(bytes.begin(), bytes.end()));
    std::vector<std::string> ids = manifest.at("cases").get<std::vector<std::string>>();
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::map<std::string, std::string> suite_asset_paths(const std::string& suite_dir) {
    std::map<std::string, std::string> out;
    auto scan = [&](const std::string& dir) {
        if (!fs::exists(dir)) return;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            auto ext = entry.path().extension().string();
            if (ext == ".ppm" || ext == ".pgm")
                out[entry.path().stem().string()] = entry.path().string();
        }
    };
    for (const auto& case_id : suite_case_ids(suite_dir)) scan(suite_dir + "/" + case_id);
    scan(suite_dir + "/distractors");
    return out;
}

IndexedImage describe_asset(const LoadedAsset& asset, const DetectorConfig& cfg) {
    IndexedImage img;
    img.id = asset.id;
    for (const auto& kp : detect(asset.raster, cfg)) img.descriptors.push_back(kp.descriptor);
    return img;
}

QuantizedIndex build_suite_index(const std::string& suite_dir, const PqConfig& pq,
                                 const DetectorConfig& detector) {
    auto paths = suite_asset_paths(suite_dir);
    std::vector<std::string> ids;
    for (const auto& [id, path] : paths) ids.push_back(id);  // sorted (map order)

    std::vector<IndexedImage> corpus(ids.size());
    parallel_for(ids.size(), [&](size_t i) {
        LoadedAsset a;
        a.id = ids[i];
        a.raster = load_pnm(paths.at(ids[i]));
        corpus[i] = describe_asset(a, detector);
    });
    return QuantizedIndex::build(corpus, pq);
}

namespace {

struct StageClock {
    std::string case_id;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    void log(const std::string& stage) {
        auto now = std::chrono::steady_clock::now();
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now - start).count();
        std::cerr << "case=" << case_id << " stage=" << stage << " ms=" << ms << "\n";
        start = now;
    }
};

}  // namespace

CaseResult run_case(const RunConfig& cfg, const LoadedCase& c,
                    const std::map<std::string, std::string>& asset_paths,
                    const QuantizedIndex* index,
                    const std::map<std::string, TagBundle>* harvested) {
    StageClock clock{c.case_id};

    // candidate selection
    std::vector<LoadedAsset> candidates;
    if (cfg.protocol == Protocol::oracle) {
        candidates = c.assets;
    } else {
        auto query_it = std::find_if(c.assets.begin(), c.assets.end(),
                                     [&](const LoadedAsset& a) { return a.id == c.query_id; });
        if (query_it == c.assets.end())
            throw ConfigError("query asset " + c.query_id + " missing from case " + c.case_id);
        RankedList ranked = query(*index, describe_asset(*query_it, cfg.detector),
                                  cfg.k, cfg.stages);
        std::vector<std::string> ids;
        ids.push_back(c.query_id);
        for (const auto& e : ranked.entries) ids.push_back(e.image_id);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        for (const auto& id : ids) {
            auto in_case = std::find_if(c.assets.begin(), c.assets.end(),
                                        [&](const LoadedAsset& a) { return a.id == id; });
            if (in_case != c.assets.end()) candidates.push_back(*in_case);
            else if (auto it = asset_paths.find(id); it != asset_paths.end())
                candidates.push_back(load_asset(it->second));
        }
        clock.log("filter");
    }
    if (candidates.size() < 2)
        throw TooFewImages("case " + c.case_id + " has fewer than two candidates");

    std::vector<std::string> ids;
    std::vector<TagBundle> bundles;
    for (const auto& a : candidates) {
        ids.push_back(a.id);
        TagBundle b = a.bundle;
        if (harvested) {
            auto it = harvested->find(a.id);
            if (it != harvested->end()) b = merge_bundles(b, it->second);
        }
        bundles.push_back(std::move(b));
    }

    // matrices
    VoteMatrix votes;
    if (cfg.method != Method::cluster_visual) {
        votes = build_vote_matrix(bundles, cfg.heuristics);
        clock.log("votes");
    }

    ProvenanceGraph candidate_graph;
    if (cfg.method == Method::kruskal_metadata) {
        candidate_graph = kruskal_build(votes, ids);
    } else {
        std::vector<VisualAsset> visual_assets;
        for (const auto& a : candidates) visual_assets.push_back({a.id, a.raster});
        VisualMatrix visual = build_visual_matrix(visual_assets, cfg.detector);
        clock.log("visual");
        size_t query_index =
            static_cast<size_t>(std::find(ids.begin(), ids.end(), c.query_id) - ids.begin());
        if (query_index >= ids.size()) throw InvalidQueryIndex("query vanished from candidates");
        if (cfg.method == Method::cluster_visual) votes = VoteMatrix(ids.size());
        candidate_graph = cluster_expand_build(visual, votes, query_index, ids, cfg.theta);
    }
    clock.log("build");

    CaseResult result;
    result.case_id = c.case_id;
    result.candidate = candidate_graph;
    result.score = score_case(candidate_graph, c.truth, cfg.undirected);
    clock.log("score");
    return result;
}

SuiteReport run_suite(const RunConfig& cfg) {
    if (cfg.suite_dir.empty()) throw ConfigError("suite directory is required");
    if (!cfg.heuristics.any() && cfg.method != Method::cluster_visual)
        throw ConfigError("at least one heuristic must be enabled for this method");
    if (cfg.protocol == Protocol::end_to_end && cfg.index_path.empty())
        throw ConfigError("end_to_end protocol requires an index");

    std::optional<QuantizedIndex> index;
    if (cfg.protocol == Protocol::end_to_end) index = QuantizedIndex::load(cfg.index_path);

    std::optional<std::map<std::string, TagBundle>> harvested;
    if (!cfg.posts_path.empty()) {
        auto bytes = read_file(cfg.posts_path);
        harvested = harvest_posts(load_post_records(std::string(bytes.begin(), bytes.end())));
    }

    auto case_ids = suite_case_ids(cfg.suite_dir);
    std::map<std::string, std::string> asset_paths;
    if (cfg.protocol == Protocol::end_to_end) asset_paths = suite_asset_paths(cfg.suite_dir);

    std::vector<CaseResult> results(case_ids.size());
    parallel_for(case_ids.size(), [&](size_t i) {
        LoadedCase c = load_case_dir(cfg.suite_dir + "/" + case_ids[i]);
        try {
            results[i] = run_case(cfg, c, asset_paths, index ? &*index : nullptr,
                                  harvested ? &*harvested : nullptr);
        } catch (const Error& e) {
            throw Error("case " + case_ids[i] + ": " + e.what());
        }
    });

    std::vector<CaseScore> scores;
    for (const auto& r : results) scores.push_back(r.score);
    SuiteReport report = aggregate(case_ids, scores);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir + "/cases");
        for (const auto& r : results) {
            std::string bam = bam_to_json(to_bam(r.candidate), r.candidate.node_ids());
            write_file(cfg.out_dir + "/cases/" + r.case_id + ".bam.json",
                       std::vector<uint8_t>(bam.begin(), bam.end()));
            if (cfg.write_dot) {
                std::string dot = to_dot(r.candidate);
                write_file(cfg.out_dir + "/cases/" + r.case_id + ".dot",
                           std::vector<uint8_t>(dot.begin(), dot.end()));
            }
        }
        std::string rj = report_to_json(report);
        write_file(cfg.out_dir + "/report.json", std::vector<uint8_t>(rj.begin(), rj.end()));
        std::string rt = report_to_table(report);
        write_file(cfg.out_dir + "/report.txt", std::vector<uint8_t>(rt.begin(), rt.end()));
    }
    return report;
}

}  // namespace provgraph
