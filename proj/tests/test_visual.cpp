#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "provgraph/common.hpp"
#include "provgraph/visual.hpp"

#include "helpers.hpp"

using namespace provgraph;
using namespace provgraph::testing;

namespace {

Raster noise_raster(uint64_t seed, int w, int h) {
    Rng rng(seed);
    Raster img = make_raster(w, h, 1);
    for (auto& px : img.pixels) px = static_cast<uint8_t>(rng.below(256));
    return img;
}

Raster checkerboard(int squares, int square_px) {
    int side = squares * square_px;
    Raster img = make_raster(side, side, 1);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            img.set(x, y, 0, ((x / square_px + y / square_px) % 2) ? 255 : 0);
    return img;
}

Descriptor256 bit_block(int start, int len) {
    Descriptor256 d;
    for (int b = start; b < start + len; ++b) d.words[(b & 255) >> 6] |= 1ULL << (b & 63);
    return d;
}

Keypoint kp_at(int x, int y, const Descriptor256& d) { return {x, y, 1, d}; }

// Independent sweep + non-maximum suppression, reimplemented from the stated
// detection rule rather than shared with detect().
std::vector<std::pair<int, int>> oracle_corners(const Raster& img, const DetectorConfig& cfg) {
    Raster g = smooth_gray(img);
    const int margin = 14;
    std::vector<std::vector<int>> resp(g.height, std::vector<int>(g.width, 0));
    for (int y = margin; y < g.height - margin; ++y)
        for (int x = margin; x < g.width - margin; ++x)
            resp[y][x] = corner_response(g, x, y, cfg.corner_threshold);

    std::vector<std::pair<int, int>> out;
    for (int y = margin; y < g.height - margin; ++y)
        for (int x = margin; x < g.width - margin; ++x) {
            int r = resp[y][x];
            if (r == 0) continue;
            bool keep = true;
            for (int dy = -3; dy <= 3; ++dy)
                for (int dx = -3; dx <= 3; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (y + dy < margin || y + dy >= g.height - margin || x + dx < margin ||
                        x + dx >= g.width - margin)
                        continue;
                    int rn = resp[y + dy][x + dx];
                    if (rn > r || (rn == r && (dy < 0 || (dy == 0 && dx < 0)))) keep = false;
                }
            if (keep) out.push_back({x, y});
        }
    return out;
}

}  // namespace

TEST_CASE("uniform image has no corners") {
    DetectorConfig cfg;
    Raster gray = make_raster(64, 64, 1, 128);
    CHECK(detect(gray, cfg).empty());
}

TEST_CASE("detection is deterministic and equal on an exact copy") {
    DetectorConfig cfg;
    Raster img = noise_raster(4, 96, 80);
    auto a = detect(img, cfg);
    auto b = detect(Raster(img), cfg);
    REQUIRE_FALSE(a.empty());
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].descriptor == b[i].descriptor);
    }
}

TEST_CASE("detector rejects undersized images and bad configs") {
    DetectorConfig cfg;
    CHECK_THROWS_AS(detect(make_raster(31, 64, 1), cfg), ImageTooSmall);
    DetectorConfig bad = cfg;
    bad.max_keypoints = 3;
    CHECK_THROWS_AS(detect(make_raster(64, 64, 1), bad), ConfigError);
}

TEST_CASE("checkerboard corners match the exhaustive oracle and the lattice") {
    DetectorConfig cfg;
    cfg.max_keypoints = 10000;
    Raster board = checkerboard(8, 16);
    auto kps = detect(board, cfg);
    auto oracle = oracle_corners(board, cfg);

    REQUIRE_FALSE(kps.empty());
    REQUIRE(kps.size() == oracle.size());
    std::set<std::pair<int, int>> got, want(oracle.begin(), oracle.end());
    for (const auto& kp : kps) got.insert({kp.x, kp.y});
    CHECK(got == want);

    // one corner per interior lattice point, each within the corner's
    // support radius
    CHECK(kps.size() == 49);
    int lattice_hits = 0;
    for (int ly = 1; ly < 8; ++ly)
        for (int lx = 1; lx < 8; ++lx) {
            int cx = lx * 16, cy = ly * 16;
            bool hit = false;
            for (const auto& [x, y] : got)
                hit = hit || (std::abs(x - cx) <= 3 && std::abs(y - cy) <= 3);
            if (hit) ++lattice_hits;
        }
    CHECK(lattice_hits == 49);
    for (const auto& [x, y] : got) {
        int dx = std::min(x % 16, 16 - x % 16);
        int dy = std::min(y % 16, 16 - y % 16);
        CHECK(dx <= 3);
        CHECK(dy <= 3);
    }
}

TEST_CASE("match_pair identity on self") {
    DetectorConfig cfg;
    Raster img = noise_raster(9, 96, 96);
    auto kps = detect(img, cfg);
    REQUIRE(kps.size() >= 10);
    auto matches = match_pair(kps, kps, cfg);
    REQUIRE(matches.size() == kps.size());
    for (const auto& m : matches) CHECK(m.a == m.b);
    CHECK_THROWS_AS(match_pair({}, kps, cfg), EmptyKeypoints);
}

TEST_CASE("equidistant neighbors fail the ratio test") {
    DetectorConfig cfg;
    std::vector<Keypoint> a{kp_at(20, 20, bit_block(0, 40))};
    std::vector<Keypoint> b{kp_at(20, 20, bit_block(10, 40)),
                            kp_at(40, 40, bit_block(246, 40))};  // both at distance 20
    CHECK(match_pair(a, b, cfg).empty());
}

TEST_CASE("perturbed descriptor drops exactly one match") {
    DetectorConfig cfg;
    std::vector<Keypoint> a, b;
    for (int i = 0; i < 10; ++i) a.push_back(kp_at(10 + i, 10, bit_block(i * 24, 40)));
    b = a;
    Rng rng(17);
    std::set<int> flips;
    while (flips.size() < 60) flips.insert(static_cast<int>(rng.below(256)));
    for (int bit : flips) b[5].descriptor.words[bit >> 6] ^= 1ULL << (bit & 63);

    // exhaustive distance-table oracle restating ratio + mutual-best
    std::vector<IndexPair> expect;
    for (uint32_t i = 0; i < a.size(); ++i) {
        int d1 = 1 << 30, d2 = 1 << 30;
        uint32_t jb = 0;
        for (uint32_t j = 0; j < b.size(); ++j) {
            int d = hamming(a[i].descriptor, b[j].descriptor);
            if (d < d1) d2 = d1, d1 = d, jb = j;
            else if (d < d2) d2 = d;
        }
        if (!(static_cast<double>(d1) < cfg.match_ratio * d2)) continue;
        int best_back = 1 << 30;
        uint32_t ib = 0;
        for (uint32_t i2 = 0; i2 < a.size(); ++i2) {
            int d = hamming(a[i2].descriptor, b[jb].descriptor);
            if (d < best_back) best_back = d, ib = i2;
        }
        if (ib == i) expect.push_back({i, jb});
    }

    auto got = match_pair(a, b, cfg);
    CHECK(got == expect);
    CHECK(got.size() == 9);
}

TEST_CASE("geometric filter keeps exact translations") {
    DetectorConfig cfg;
    std::vector<Keypoint> a, b;
    std::vector<IndexPair> matches;
    Rng rng(23);
    for (uint32_t i = 0; i < 25; ++i) {
        int x = 20 + static_cast<int>(rng.below(150));
        int y = 20 + static_cast<int>(rng.below(150));
        a.push_back(kp_at(x, y, {}));
        b.push_back(kp_at(x + 7, y - 4, {}));
        matches.push_back({i, i});
    }
    auto result = filter_geometric(matches, a, b, cfg);
    CHECK(result.consistent);
    CHECK(result.inliers == matches);
}

TEST_CASE("geometric filter rejects planted outliers") {
    DetectorConfig cfg;
    std::vector<Keypoint> a, b;
    std::vector<IndexPair> matches;
    Rng rng(29);
    for (uint32_t i = 0; i < 20; ++i) {  // consistent translation block
        int x = 30 + static_cast<int>(rng.below(120));
        int y = 30 + static_cast<int>(rng.below(120));
        a.push_back(kp_at(x, y, {}));
        b.push_back(kp_at(x + 11, y + 3, {}));
        matches.push_back({i, i});
    }
    for (uint32_t i = 20; i < 30; ++i) {  // scattered outliers, far off the model
        int x = 30 + static_cast<int>(rng.below(120));
        int y = 30 + static_cast<int>(rng.below(120));
        a.push_back(kp_at(x, y, {}));
        b.push_back(kp_at(x + 11 + 20 + static_cast<int>(rng.below(60)),
                          y + 3 + 20 + static_cast<int>(rng.below(60)), {}));
        matches.push_back({i, i});
    }
    auto result = filter_geometric(matches, a, b, cfg);
    REQUIRE(result.consistent);
    std::vector<IndexPair> expect(matches.begin(), matches.begin() + 20);
    CHECK(result.inliers == expect);
}

TEST_CASE("fewer than four matches come back unchanged") {
    DetectorConfig cfg;
    std::vector<Keypoint> a{kp_at(10, 10, {}), kp_at(40, 10, {}), kp_at(10, 40, {})};
    std::vector<IndexPair> matches{{0, 0}, {1, 1}, {2, 2}};
    auto result = filter_geometric(matches, a, a, cfg);
    CHECK_FALSE(result.consistent);
    CHECK(result.inliers == matches);
}

TEST_CASE("visual matrix on noise, duplicates and crops") {
    DetectorConfig cfg;
    cfg.max_keypoints = 150;

    // unrelated noise pairs carry (near) zero weight
    std::vector<VisualAsset> noise;
    for (int i = 0; i < 4; ++i)
        noise.push_back({"noise" + std::to_string(i), noise_raster(100 + i, 96, 96)});
    VisualMatrix nm = build_visual_matrix(noise, cfg);
    for (size_t i = 0; i < noise.size(); ++i)
        for (size_t j = i + 1; j < noise.size(); ++j) CHECK(nm.at(i, j) <= 2);

    // a duplicate pair matches every keypoint
    Raster img = noise_raster(7, 96, 96);
    auto kps = detect(img, cfg);
    std::vector<VisualAsset> dup{{"a", img}, {"b", img}};
    VisualMatrix dm = build_visual_matrix(dup, cfg);
    CHECK(dm.at(0, 1) == static_cast<int>(kps.size()));

    // crop outranks an unrelated image
    Raster big = noise_raster(42, 200, 200);
    Raster crop = make_raster(120, 120, 1);
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x) crop.set(x, y, 0, big.at(x + 30, y + 40));
    std::vector<VisualAsset> trio{{"A", big}, {"B", noise_raster(43, 200, 200)}, {"C", crop}};
    VisualMatrix tm = build_visual_matrix(trio, cfg);
    CHECK(tm.at(0, 2) > 0);
    CHECK(tm.at(0, 2) > tm.at(0, 1));

    // symmetry and zero diagonal hold for every build
    for (const auto& m : {nm, dm, tm})
        for (size_t i = 0; i < m.size(); ++i)
            for (size_t j = 0; j < m.size(); ++j) {
                CHECK(m.at(i, j) == m.at(j, i));
                if (i == j) CHECK(m.at(i, j) == 0);
            }
}

TEST_CASE("translated copy keeps at least half the self-weight") {
    DetectorConfig cfg;
    cfg.max_keypoints = 300;
    Raster img = noise_raster(55, 128, 128);
    Raster shifted = make_raster(128, 128, 1, 128);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            int sx = x - 8, sy = y - 5;
            if (sx >= 0 && sy >= 0) shifted.set(x, y, 0, img.at(sx, sy));
        }
    std::vector<VisualAsset> self{{"a", img}, {"b", img}};
    std::vector<VisualAsset> trans{{"a", img}, {"b", shifted}};
    int self_w = build_visual_matrix(self, cfg).at(0, 1);
    int trans_w = build_visual_matrix(trans, cfg).at(0, 1);
    CHECK(trans_w * 2 >= self_w);
}

TEST_CASE("visual matrix is deterministic and permutation-equivariant") {
    DetectorConfig cfg;
    cfg.max_keypoints = 120;
    std::vector<VisualAsset> assets;
    Raster base = noise_raster(60, 128, 128);
    Raster crop = make_raster(96, 96, 1);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) crop.set(x, y, 0, base.at(x + 16, y + 20));
    assets.push_back({"p", base});
    assets.push_back({"q", crop});
    assets.push_back({"r", noise_raster(61, 128, 128)});

    VisualMatrix m1 = build_visual_matrix(assets, cfg);
    VisualMatrix m2 = build_visual_matrix(assets, cfg);
    CHECK(m1 == m2);

    std::vector<VisualAsset> permuted{assets[2], assets[0], assets[1]};
    VisualMatrix pm = build_visual_matrix(permuted, cfg);
    size_t perm[3] = {2, 0, 1};
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(pm.at(i, j) == m1.at(perm[i], perm[j]));

    CHECK_THROWS_AS(build_visual_matrix({assets[0]}, cfg), TooFewImages);
}

TEST_CASE("ingest_matrix validation") {
    CHECK(ingest_matrix(R"({"kind":"visual","ids":["a","b"],"data":[[0,5],[5,0]]})").at(0, 1) == 5);
    CHECK_THROWS_AS(ingest_matrix(R"({"kind":"visual","ids":["a","b"],"data":[[0,5],[4,0]]})"),
                    AsymmetryError);
    CHECK_THROWS_AS(ingest_matrix(R"({"kind":"visual","ids":["a","b"],"data":[[1,5],[5,0]]})"),
                    SchemaError);
    CHECK_THROWS_AS(ingest_matrix(R"({"kind":"votes","ids":["a","b"],"data":[[0,5],[5,0]]})"),
                    SchemaError);
    CHECK_THROWS_AS(ingest_matrix(R"({"kind":"visual","ids":["a","b"],"data":[[0,-5],[-5,0]]})"),
                    NegativeWeight);
    CHECK_THROWS_AS(ingest_matrix(R"({"kind":"visual","ids":["a"],"data":[[0,5],[5,0]]})"),
                    SchemaError);
    CHECK_THROWS_AS(ingest_matrix("nonsense"), SchemaError);
}
