// provgraph: reconstructs directed image provenance graphs from a pool of
// related images by fusing pixel-content similarity with metadata votes.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "provgraph/common.hpp"
#include "provgraph/datagen.hpp"
#include "provgraph/filtering.hpp"
#include "provgraph/matrixio.hpp"
#include "provgraph/pipeline.hpp"
#include "provgraph/sidecar.hpp"

using namespace provgraph;

namespace {

std::string slurp(const std::string& path) {
    auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

void spit(const std::string& path, const std::string& text) {
    write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

bool parse_order_range(const std::string& s, int& lo, int& hi) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            lo = hi = std::stoi(s);
        } else {
            lo = std::stoi(s.substr(0, dots));
            hi = std::stoi(s.substr(dots + 2));
        }
    } catch (const std::exception&) {
        return false;
    }
    return lo >= 2 && hi >= lo;
}

int cmd_gen(const std::string& out, int cases, const std::string& order, double corruption,
            uint64_t seed, int distractors, const std::string& menu_csv, double root_bias,
            int roots) {
    SuiteSpec spec;
    spec.case_count = cases;
    spec.distractor_count = distractors;
    spec.seed = seed;
    spec.roots_per_case = roots;
    spec.proto.metadata_corruption = corruption;
    spec.proto.root_bias = root_bias;
    if (!parse_order_range(order, spec.proto.min_order, spec.proto.max_order))
        throw ConfigError("bad --order, expected e.g. 5..15");
    if (!menu_csv.empty()) {
        spec.proto.menu.clear();
        std::string item;
        for (char c : menu_csv + ",") {
            if (c == ',') {
                if (!item.empty()) spec.proto.menu.push_back(transform_from_name(item));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
    }
    generate_suite(spec, out);
    std::cerr << "suite written to " << out << "\n";
    return 0;
}

int cmd_index(const std::string& suite, const std::string& out, uint32_t coarse, uint32_t sub,
              uint64_t seed, int max_keypoints) {
    PqConfig pq;
    pq.coarse_centroids = coarse;
    pq.subquantizers = sub;
    DetectorConfig det;
    det.seed = seed;
    det.max_keypoints = max_keypoints;
    QuantizedIndex index = build_suite_index(suite, pq, det);
    index.save(out);
    std::cerr << "index over " << index.image_count() << " images written to " << out << "\n";
    return 0;
}

int cmd_filter(const std::string& index_path, const std::string& query_path, size_t k, int stages,
               const std::string& out) {
    QuantizedIndex index = QuantizedIndex::load(index_path);
    LoadedAsset asset = load_asset(query_path);
    DetectorConfig det;
    RankedList ranked = query(index, describe_asset(asset, det), k, stages);

    nlohmann::json j;
    j["query"] = ranked.query_id;
    auto& entries = j["entries"];
    entries = nlohmann::json::array();
    for (const auto& e : ranked.entries) entries.push_back({{"id", e.image_id}, {"score", e.score}});
    if (out.empty()) std::cout << j.dump(1) << "\n";
    else spit(out, j.dump(1));
    return 0;
}

int cmd_matrices(const std::string& case_dir, const std::string& votes_out,
                 const std::string& visual_out, const std::vector<std::string>& heuristics,
                 const std::string& posts, uint64_t seed) {
    LoadedCase c = load_case_dir(case_dir);
    std::vector<std::string> ids;
    std::vector<TagBundle> bundles;
    std::map<std::string, TagBundle> harvested;
    if (!posts.empty()) harvested = harvest_posts(load_post_records(slurp(posts)));
    for (const auto& a : c.assets) {
        ids.push_back(a.id);
        TagBundle b = a.bundle;
        if (auto it = harvested.find(a.id); it != harvested.end()) b = merge_bundles(b, it->second);
        bundles.push_back(std::move(b));
    }

    if (!votes_out.empty()) {
        HeuristicSet set =
            heuristics.empty() ? HeuristicSet::all() : heuristic_set_from_names(heuristics);
        VoteMatrix m = build_vote_matrix(bundles, set);
        MatrixDoc doc;
        doc.kind = "votes";
        doc.ids = ids;
        doc.data.assign(m.size(), std::vector<int>(m.size(), 0));
        for (size_t i = 0; i < m.size(); ++i)
            for (size_t j = 0; j < m.size(); ++j) doc.data[i][j] = m.at(i, j);
        spit(votes_out, matrix_to_json(doc));
    }
    if (!visual_out.empty()) {
        DetectorConfig det;
        det.seed = seed;
        std::vector<VisualAsset> assets;
        for (const auto& a : c.assets) assets.push_back({a.id, a.raster});
        VisualMatrix m = build_visual_matrix(assets, det);
        MatrixDoc doc;
        doc.kind = "visual";
        doc.ids = ids;
        doc.data.assign(m.size(), std::vector<int>(m.size(), 0));
        for (size_t i = 0; i < m.size(); ++i)
            for (size_t j = 0; j < m.size(); ++j) doc.data[i][j] = m.at(i, j);
        spit(visual_out, matrix_to_json(doc));
    }
    return 0;
}

int cmd_build(const std::string& method, const std::string& votes_path,
              const std::string& visual_path, const std::string& query_id,
              const std::string& bam_out, const std::string& dot_out, int theta) {
    ProvenanceGraph g;
    if (method == "kruskal") {
        if (votes_path.empty()) throw ConfigError("kruskal needs --votes");
        MatrixDoc doc = matrix_from_json(slurp(votes_path));
        if (doc.kind != "votes") throw SchemaError("matrix kind must be \"votes\"");
        VoteMatrix m(doc.data.size());
        for (size_t i = 0; i < doc.data.size(); ++i)
            for (size_t j = 0; j < doc.data.size(); ++j) m.set(i, j, doc.data[i][j]);
        g = kruskal_build(m, doc.ids);
    } else if (method == "cluster") {
        if (visual_path.empty()) throw ConfigError("cluster needs --visual");
        std::vector<std::string> ids;
        VisualMatrix d = ingest_matrix(slurp(visual_path), ids);
        VoteMatrix m(d.size());
        if (!votes_path.empty()) {
            MatrixDoc doc = matrix_from_json(slurp(votes_path));
            if (doc.kind != "votes") throw SchemaError("matrix kind must be \"votes\"");
            if (doc.data.size() != d.size() || doc.ids != ids)
                throw SizeMismatch("votes and visual matrices disagree");
            for (size_t i = 0; i < doc.data.size(); ++i)
                for (size_t j = 0; j < doc.data.size(); ++j) m.set(i, j, doc.data[i][j]);
        }
        auto it = std::find(ids.begin(), ids.end(), query_id);
        if (it == ids.end()) throw InvalidQueryIndex("query id not among matrix ids");
        g = cluster_expand_build(d, m, static_cast<size_t>(it - ids.begin()), ids, theta);
    } else {
        throw ConfigError("method must be kruskal or cluster");
    }

    if (!bam_out.empty()) spit(bam_out, bam_to_json(to_bam(g), g.node_ids()));
    if (!dot_out.empty()) spit(dot_out, to_dot(g));
    if (bam_out.empty() && dot_out.empty()) std::cout << to_dot(g);
    return 0;
}

int cmd_score(const std::string& truth_dir, const std::string& candidate_dir, bool undirected,
              const std::string& report_out) {
    namespace fs = std::filesystem;
    std::vector<std::string> case_ids;
    for (const auto& entry : fs::directory_iterator(candidate_dir)) {
        std::string name = entry.path().filename().string();
        const std::string suffix = ".bam.json";
        if (name.size() > suffix.size() && name.ends_with(suffix))
            case_ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(case_ids.begin(), case_ids.end());
    if (case_ids.empty()) throw ConfigError("no *.bam.json candidates in " + candidate_dir);

    std::vector<CaseScore> scores;
    for (const auto& id : case_ids) {
        auto [cb, cids] = bam_from_json(slurp(candidate_dir + "/" + id + ".bam.json"));
        std::string truth_path = truth_dir + "/" + id + ".bam.json";
        if (!fs::exists(truth_path)) truth_path = truth_dir + "/" + id + "/truth.bam.json";
        auto [tb, tids] = bam_from_json(slurp(truth_path));
        scores.push_back(score_case(from_bam(cb, cids), from_bam(tb, tids), undirected));
    }
    SuiteReport report = aggregate(case_ids, scores);
    std::cout << report_to_table(report);
    if (!report_out.empty()) spit(report_out, report_to_json(report));
    return 0;
}

int cmd_run(RunConfig cfg) {
    SuiteReport report = run_suite(cfg);
    std::cout << report_to_table(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image provenance graph toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic provenance suite");
    std::string gen_out = "suite";
    int gen_cases = 50;
    std::string gen_order = "5..15";
    double gen_corruption = 0.0;
    uint64_t gen_seed = 7;
    int gen_distractors = 0;
    std::string gen_menu;
    double gen_root_bias = 0.9;
    int gen_roots = 1;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--cases", gen_cases, "number of cases");
    gen->add_option("--order", gen_order, "graph order range, e.g. 5..15");
    gen->add_option("--corruption", gen_corruption, "per-tag corruption rate in [0,1]");
    gen->add_option("--seed", gen_seed, "suite seed");
    gen->add_option("--distractors", gen_distractors, "distractor image count");
    gen->add_option("--menu", gen_menu, "comma-separated transform menu");
    gen->add_option("--root-bias", gen_root_bias, "probability an edit derives from a root");
    gen->add_option("--roots-per-case", gen_roots, "seed rasters per case");

    // index
    auto* index = app.add_subcommand("index", "build the quantized retrieval index");
    std::string idx_suite, idx_out = "index.pvix";
    uint32_t idx_coarse = 256, idx_sub = 8;
    uint64_t idx_seed = 0x70726F7667ULL;
    int idx_kp = 500;
    index->add_option("--suite", idx_suite, "suite directory")->required();
    index->add_option("--out", idx_out, "index file");
    index->add_option("--coarse", idx_coarse, "coarse centroid count");
    index->add_option("--sub", idx_sub, "subquantizer count (divides 256)");
    index->add_option("--seed", idx_seed, "detector seed");
    index->add_option("--max-keypoints", idx_kp, "descriptors per image");

    // filter
    auto* filter = app.add_subcommand("filter", "rank corpus images against a query");
    std::string flt_index, flt_query, flt_out;
    size_t flt_k = 100;
    int flt_stages = 2;
    filter->add_option("--index", flt_index, "PVIX index file")->required();
    filter->add_option("--query", flt_query, "query image (PPM/PGM)")->required();
    filter->add_option("--k", flt_k, "results to keep");
    filter->add_option("--stages", flt_stages, "query-expansion stages");
    filter->add_option("--out", flt_out, "ranked list JSON (stdout when omitted)");

    // matrices
    auto* matrices = app.add_subcommand("matrices", "compute adjacency matrices for a case");
    std::string mat_case, mat_votes, mat_visual, mat_posts;
    std::vector<std::string> mat_heuristics;
    uint64_t mat_seed = 0x70726F7667ULL;
    matrices->add_option("--case", mat_case, "case directory")->required();
    matrices->add_option("--votes-out", mat_votes, "vote matrix JSON path");
    matrices->add_option("--visual-out", mat_visual, "visual matrix JSON path");
    matrices->add_option("--heuristics", mat_heuristics,
                         "subset of date,location,camera,editing,thumbnail");
    matrices->add_option("--posts", mat_posts, "post records JSON for harvested fallback");
    matrices->add_option("--seed", mat_seed, "detector seed");

    // build
    auto* build = app.add_subcommand("build", "construct a provenance graph from matrices");
    std::string bld_method = "kruskal", bld_votes, bld_visual, bld_query, bld_bam, bld_dot;
    int bld_theta = 8;
    build->add_option("--method", bld_method, "kruskal | cluster");
    build->add_option("--votes", bld_votes, "vote matrix JSON");
    build->add_option("--visual", bld_visual, "visual matrix JSON");
    build->add_option("--query", bld_query, "query asset id (cluster method)");
    build->add_option("--bam", bld_bam, "output BAM JSON");
    build->add_option("--dot", bld_dot, "output DOT file");
    build->add_option("--theta", bld_theta, "minimum consistent matches per expansion edge");

    // score
    auto* score = app.add_subcommand("score", "score candidate graphs against ground truth");
    std::string sc_truth, sc_cand, sc_report;
    bool sc_undirected = false;
    score->add_option("--truth-dir", sc_truth, "truth BAMs or suite directory")->required();
    score->add_option("--candidate-dir", sc_cand, "candidate *.bam.json directory")->required();
    score->add_flag("--undirected", sc_undirected, "compare edges without direction");
    score->add_option("--report", sc_report, "report JSON path");

    // run
    auto* run = app.add_subcommand("run", "run a whole protocol over a suite");
    std::string run_config_path, run_suite_dir, run_index, run_out, run_posts;
    std::string run_protocol = "oracle", run_method = "kruskal_metadata";
    std::vector<std::string> run_heuristics;
    size_t run_k = 100;
    int run_stages = 2, run_theta = 8;
    uint64_t run_seed = 0x70726F7667ULL;
    bool run_dot = false, run_undirected = false;
    run->add_option("--config", run_config_path, "RunConfig JSON file");
    run->add_option("--suite", run_suite_dir, "suite directory");
    run->add_option("--protocol", run_protocol, "oracle | end_to_end");
    run->add_option("--method", run_method, "kruskal_metadata | cluster_visual | cluster_fused");
    run->add_option("--heuristics", run_heuristics, "heuristic subset (default: all)");
    run->add_option("--k", run_k, "retrieval depth for end_to_end");
    run->add_option("--stages", run_stages, "query-expansion stages");
    run->add_option("--theta", run_theta, "expansion weight threshold");
    run->add_option("--index", run_index, "PVIX index (end_to_end)");
    run->add_option("--out", run_out, "report output directory");
    run->add_option("--posts", run_posts, "post records JSON for harvested fallback");
    run->add_option("--seed", run_seed, "detector seed");
    run->add_flag("--dot", run_dot, "emit per-case DOT files");
    run->add_flag("--undirected", run_undirected, "score edges without direction");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_cases, gen_order, gen_corruption, gen_seed,
                           gen_distractors, gen_menu, gen_root_bias, gen_roots);
        if (index->parsed())
            return cmd_index(idx_suite, idx_out, idx_coarse, idx_sub, idx_seed, idx_kp);
        if (filter->parsed()) return cmd_filter(flt_index, flt_query, flt_k, flt_stages, flt_out);
        if (matrices->parsed())
            return cmd_matrices(mat_case, mat_votes, mat_visual, mat_heuristics, mat_posts,
                                mat_seed);
        if (build->parsed())
            return cmd_build(bld_method, bld_votes, bld_visual, bld_query, bld_bam, bld_dot,
                             bld_theta);
        if (score->parsed()) return cmd_score(sc_truth, sc_cand, sc_undirected, sc_report);
        if (run->parsed()) {
            RunConfig cfg;
            if (!run_config_path.empty()) cfg = run_config_from_json(slurp(run_config_path));
            if (!run_suite_dir.empty()) cfg.suite_dir = run_suite_dir;
            if (run->count("--protocol") || run_config_path.empty())
                cfg.protocol = protocol_from_name(run_protocol);
            if (run->count("--method") || run_config_path.empty())
                cfg.method = method_from_name(run_method);
            if (!run_heuristics.empty()) cfg.heuristics = heuristic_set_from_names(run_heuristics);
            if (run->count("--k")) cfg.k = run_k;
            if (run->count("--stages")) cfg.stages = run_stages;
            if (run->count("--theta")) cfg.theta = run_theta;
            if (!run_index.empty()) cfg.index_path = run_index;
            if (!run_out.empty()) cfg.out_dir = run_out;
            if (!run_posts.empty()) cfg.posts_path = run_posts;
            if (run->count("--seed")) cfg.detector.seed = run_seed;
            if (run_dot) cfg.write_dot = true;
            if (run_undirected) cfg.undirected = true;
            return cmd_run(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
