#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provgraph/common.hpp"
#include "provgraph/graphbuild.hpp"
#include "provgraph/raster.hpp"
#include "provgraph/tags.hpp"

namespace provgraph {

enum class Transform { crop, resize, brightness, blur, rotate, splice };

Transform transform_from_name(const std::string& name);
std::string transform_name(Transform t);

struct CaseSpec {
    int min_order = 5;
    int max_order = 15;
    std::vector<Transform> menu = {Transform::crop, Transform::resize, Transform::brightness,
                                   Transform::blur, Transform::rotate};
    double metadata_corruption = 0.0;  // per-tag strip / date-perturb rate on derived images
    uint64_t seed = 1;
    // Probability a derived image is edited directly from a root. Shared-
    // platform provenance (one base post, many independent edits) sits near 1;
    // long edit chains near 0.
    double root_bias = 0.9;
};

struct GeneratedAsset {
    std::string id;
    Raster raster;
    TagBundle bundle;
};

struct GeneratedCase {
    std::string case_id;
    std::vector<GeneratedAsset> assets;  // creation order; ids sort the same way
    ProvenanceGraph truth;
    std::string query_id;
};

// Procedural corner-rich test image: gradient background, random rectangles
// and ellipses, block-noise overlay. Deterministic per seed.
Raster make_root_raster(uint64_t seed, int width = 256, int height = 256);

// Deterministic pixel transforms (integer arithmetic only).
Raster apply_crop(const Raster& src, Rng& rng);
Raster apply_resize(const Raster& src, Rng& rng);
Raster apply_brightness(const Raster& src, Rng& rng);
Raster apply_blur(const Raster& src);
Raster apply_rotate(const Raster& src, Rng& rng);
Raster apply_splice(const Raster& host, const Raster& donor, Rng& rng);

// Grows a random DAG of the requested order from the given roots. Each child
// is one sampled transform of its parent (plus a donor for splices), with
// causal metadata: inherited tags, strictly advancing ModifyDate, editor
// Software on every edit, editing traces on splices, GPS preserved on
// near-duplicates and stripped from composites, thumbnails regenerated on
// near-duplicates and dropped on composites. The corruption pass then strips
// tags (or shifts dates by up to a year) at the configured rate.
GeneratedCase generate_case(const CaseSpec& spec, const std::vector<Raster>& roots,
                            const std::string& case_id = "case");

// Root-like standalone image + metadata, unrelated to any case.
GeneratedAsset make_distractor(uint64_t seed, const std::string& id);

struct SuiteSpec {
    int case_count = 50;
    CaseSpec proto;  // per-case seeds are derived from the suite seed
    int distractor_count = 0;
    uint64_t seed = 7;
    int roots_per_case = 1;  // forced to >= 2 when the menu contains splice
};

// Layout: <out_dir>/<case_id>/{<asset>.ppm, <asset>.exif, truth.bam.json,
// query.txt, spec.json}, <out_dir>/distractors/*, <out_dir>/manifest.json.
void generate_suite(const SuiteSpec& spec, const std::string& out_dir);

std::vector<GeneratedCase> generate_suite_cases(const SuiteSpec& spec);

void write_case(const GeneratedCase& c, const CaseSpec& spec, const std::string& dir);

}  // namespace provgraph
