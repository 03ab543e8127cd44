#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "provgraph/graphbuild.hpp"
#include "provgraph/raster.hpp"

namespace provgraph {

// 256-bit binary descriptor, compared under Hamming distance.
struct Descriptor256 {
    std::array<uint64_t, 4> words{};
    bool operator==(const Descriptor256&) const = default;
};

inline int hamming(const Descriptor256& a, const Descriptor256& b) {
    int d = 0;
    for (int i = 0; i < 4; ++i)
        d += __builtin_popcountll(a.words[i] ^ b.words[i]);
    return d;
}

struct Keypoint {
    int x = 0;
    int y = 0;
    int response = 0;
    Descriptor256 descriptor;
};

struct DetectorConfig {
    int max_keypoints = 500;      // p: strongest corners kept per image
    int corner_threshold = 20;    // intensity delta for the segment test
    double match_ratio = 0.8;     // Lowe-style nearest/second-nearest ratio
    int ransac_iterations = 1000;
    double inlier_px = 3.0;
    uint64_t seed = 0x70726F7667ULL;  // consensus sampling seed
};

// Segment-test corners on the smoothed grayscale image, strongest first,
// capped at max_keypoints, each carrying a binary intensity-comparison
// descriptor. Deterministic for identical input. Throws ImageTooSmall below
// 32 px on either side.
std::vector<Keypoint> detect(const Raster& image, const DetectorConfig& cfg);

// Corner test at a single pixel of a smoothed grayscale image; exposed so
// tests can sweep it exhaustively. Returns the response score (0 = no corner).
int corner_response(const Raster& smoothed_gray, int x, int y, int threshold);

// 3x3 box smoothing of the grayscale conversion, rounding to nearest.
Raster smooth_gray(const Raster& image);

struct IndexPair {
    uint32_t a = 0;
    uint32_t b = 0;
    auto operator<=>(const IndexPair&) const = default;
};

// Brute-force descriptor matching with ratio test and mutual-best check.
std::vector<IndexPair> match_pair(const std::vector<Keypoint>& a, const std::vector<Keypoint>& b,
                                  const DetectorConfig& cfg);

struct GeometricResult {
    std::vector<IndexPair> inliers;
    bool consistent = false;
};

// Seeded consensus fit of a 2D affine transform; returns matches within
// inlier_px of the best model. Fewer than four matches come back unchanged
// with consistent = false.
GeometricResult filter_geometric(const std::vector<IndexPair>& matches,
                                 const std::vector<Keypoint>& a_keypoints,
                                 const std::vector<Keypoint>& b_keypoints,
                                 const DetectorConfig& cfg, uint64_t seed_override = 0);

struct VisualAsset {
    std::string id;
    Raster raster;
};

// weights[i][j] = count of geometrically consistent matches for pair {i, j};
// exactly (N^2 - N) / 2 pair computations, deterministic per-pair seeding
// derived from the sorted id pair.
VisualMatrix build_visual_matrix(const std::vector<VisualAsset>& assets,
                                 const DetectorConfig& cfg);

// Validates and loads an externally computed matrix
// ({"kind":"visual","ids":[...],"data":[[...]]}).
VisualMatrix ingest_matrix(const std::string& json_text);
VisualMatrix ingest_matrix(const std::string& json_text, std::vector<std::string>& ids_out);

}  // namespace provgraph
