#include "provgraph/visual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "provgraph/common.hpp"
#include "provgraph/matrixio.hpp"
#include "provgraph/parallel.hpp"

namespace provgraph {

namespace {

constexpr int kMargin = 14;  // keypoint border: descriptor patch + smoothing

// 256 comparison point pairs inside a 27x27 patch, fixed at first use.
struct PatternPair {
    int8_t x1, y1, x2, y2;
};

const std::array<PatternPair, 256>& pattern() {
    static const std::array<PatternPair, 256> table = [] {
        std::array<PatternPair, 256> t{};
        Rng rng(0xBADC0DEDB16B00B5ULL);
        for (auto& p : t) {
            do {
                p.x1 = static_cast<int8_t>(rng.range(-13, 13));
                p.y1 = static_cast<int8_t>(rng.range(-13, 13));
                p.x2 = static_cast<int8_t>(rng.range(-13, 13));
                p.y2 = static_cast<int8_t>(rng.range(-13, 13));
            } while (p.x1 == p.x2 && p.y1 == p.y2);
        }
        return t;
    }();
    return table;
}

Descriptor256 describe(const Raster& smoothed, int x, int y) {
    Descriptor256 d;
    const auto& pat = pattern();
    for (size_t bit = 0; bit < 256; ++bit) {
        const auto& p = pat[bit];
        uint8_t v1 = smoothed.at(x + p.x1, y + p.y1);
        uint8_t v2 = smoothed.at(x + p.x2, y + p.y2);
        if (v1 < v2) d.words[bit >> 6] |= 1ULL << (bit & 63);
    }
    return d;
}

// Affine least squares on the given matches: b ~= A * [x y 1]^T. Returns
// false when the normal equations are singular.
bool fit_affine(const std::vector<IndexPair>& sample, const std::vector<Keypoint>& a,
                const std::vector<Keypoint>& b, double model[6]) {
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, s1 = 0;
    double bx[3] = {0, 0, 0}, by[3] = {0, 0, 0};
    for (const auto& mkey : sample) {
        double x = a[mkey.a].x, y = a[mkey.a].y;
        double u = b[mkey.b].x, v = b[mkey.b].y;
        sxx += x * x;
        sxy += x * y;
        sx += x;
        syy += y * y;
        sy += y;
        s1 += 1;
        bx[0] += x * u;
        bx[1] += y * u;
        bx[2] += u;
        by[0] += x * v;
        by[1] += y * v;
        by[2] += v;
    }
    double mat[3][3] = {{sxx, sxy, sx}, {sxy, syy, sy}, {sx, sy, s1}};
    double det = mat[0][0] * (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1]) -
                 mat[0][1] * (mat[1][0] * mat[2][2] - mat[1][2] * mat[2][0]) +
                 mat[0][2] * (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]);
    if (std::fabs(det) < 1e-9) return false;

    double inv[3][3];
    inv[0][0] = (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1]) / det;
    inv[0][1] = (mat[0][2] * mat[2][1] - mat[0][1] * mat[2][2]) / det;
    inv[0][2] = (mat[0][1] * mat[1][2] - mat[0][2] * mat[1][1]) / det;
    inv[1][0] = (mat[1][2] * mat[2][0] - mat[1][0] * mat[2][2]) / det;
    inv[1][1] = (mat[0][0] * mat[2][2] - mat[0][2] * mat[2][0]) / det;
    inv[1][2] = (mat[0][2] * mat[1][0] - mat[0][0] * mat[1][2]) / det;
    inv[2][0] = (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]) / det;
    inv[2][1] = (mat[0][1] * mat[2][0] - mat[0][0] * mat[2][1]) / det;
    inv[2][2] = (mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]) / det;

    for (int r = 0; r < 3; ++r) {
        model[r] = inv[r][0] * bx[0] + inv[r][1] * bx[1] + inv[r][2] * bx[2];
        model[3 + r] = inv[r][0] * by[0] + inv[r][1] * by[1] + inv[r][2] * by[2];
    }
    return true;
}

int count_inliers(const double model[6], const std::vector<IndexPair>& matches,
                  const std::vector<Keypoint>& a, const std::vector<Keypoint>& b,
                  double tol2, std::vector<IndexPair>* out) {
    int count = 0;
    for (const auto& mkey : matches) {
        double x = a[mkey.a].x, y = a[mkey.a].y;
        double u = model[0] * x + model[1] * y + model[2];
        double v = model[3] * x + model[4] * y + model[5];
        double dx = u - b[mkey.b].x, dy = v - b[mkey.b].y;
        if (dx * dx + dy * dy <= tol2) {
            ++count;
            if (out) out->push_back(mkey);
        }
    }
    return count;
}

}  // namespace

Raster smooth_gray(const Raster& image) {
    Raster gray = to_gray(image);
    Raster out = make_raster(gray.width, gray.height, 1);
    for (int y = 0; y < gray.height; ++y) {
        for (int x = 0; x < gray.width; ++x) {
            int sum = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                int yy = std::clamp(y + dy, 0, gray.height - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    int xx = std::clamp(x + dx, 0, gray.width - 1);
                    sum += gray.at(xx, yy);
                }
            }
            out.set(x, y, 0, static_cast<uint8_t>((sum + 4) / 9));
        }
    }
    return out;
}

// Self-dissimilarity corner test: minimum over four shift directions of the
// 3x3 patch SSD, taken at sampling distances 1 and 2 (the latter keeps
// smoothing ramps visible). Edges score zero along their own direction;
// corners, including checkerboard X-corners, score high in every direction.
// The threshold is an average per-pixel intensity delta.
int corner_response(const Raster& g, int x, int y, int threshold) {
    static constexpr int kDir[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    int response = 0;
    for (int dist = 1; dist <= 2; ++dist) {
        int weakest = std::numeric_limits<int>::max();
        for (const auto& s : kDir) {
            int ssd = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int d = static_cast<int>(g.at(x + dx, y + dy)) -
                            static_cast<int>(g.at(x + dx + s[0] * dist, y + dy + s[1] * dist));
                    ssd += d * d;
                }
            weakest = std::min(weakest, ssd);
        }
        response = std::max(response, weakest);
    }
    return response >= 9 * threshold * threshold ? response : 0;
}

std::vector<Keypoint> detect(const Raster& image, const DetectorConfig& cfg) {
    if (image.width < 32 || image.height < 32)
        throw ImageTooSmall("detector needs at least 32 px on each side");
    if (cfg.max_keypoints < 4) throw ConfigError("max_keypoints must be at least 4");
    if (cfg.corner_threshold <= 0 || cfg.match_ratio <= 0.0 || cfg.match_ratio > 1.0 ||
        cfg.ransac_iterations <= 0 || cfg.inlier_px <= 0.0)
        throw ConfigError("detector thresholds must be positive");

    Raster g = smooth_gray(image);
    std::vector<int> response(static_cast<size_t>(g.width) * g.height, 0);
    for (int y = kMargin; y < g.height - kMargin; ++y)
        for (int x = kMargin; x < g.width - kMargin; ++x)
            response[static_cast<size_t>(y) * g.width + x] =
                corner_response(g, x, y, cfg.corner_threshold);

    // non-maximum suppression over a radius-3 neighborhood; ties survive at
    // the smallest (y, x)
    constexpr int kNms = 3;
    std::vector<Keypoint> kps;
    for (int y = kMargin; y < g.height - kMargin; ++y) {
        for (int x = kMargin; x < g.width - kMargin; ++x) {
            int r = response[static_cast<size_t>(y) * g.width + x];
            if (r == 0) continue;
            bool best = true;
            for (int dy = -kNms; dy <= kNms && best; ++dy) {
                for (int dx = -kNms; dx <= kNms; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (y + dy < kMargin || y + dy >= g.height - kMargin || x + dx < kMargin ||
                        x + dx >= g.width - kMargin)
                        continue;
                    int rn = response[static_cast<size_t>(y + dy) * g.width + (x + dx)];
                    if (rn > r || (rn == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                        best = false;
                        break;
                    }
                }
            }
            if (best) kps.push_back({x, y, r, {}});
        }
    }

    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (kps.size() > static_cast<size_t>(cfg.max_keypoints))
        kps.resize(static_cast<size_t>(cfg.max_keypoints));

    for (auto& kp : kps) kp.descriptor = describe(g, kp.x, kp.y);
    return kps;
}

std::vector<IndexPair> match_pair(const std::vector<Keypoint>& a, const std::vector<Keypoint>& b,
                                  const DetectorConfig& cfg) {
    if (a.empty() || b.empty()) throw EmptyKeypoints("match_pair requires nonempty keypoint sets");

    const int inf = std::numeric_limits<int>::max();
    std::vector<int> best_b_dist(b.size(), inf);
    std::vector<uint32_t> best_b_from(b.size(), 0);

    std::vector<IndexPair> out;
    std::vector<std::pair<uint32_t, uint32_t>> candidates;
    for (uint32_t i = 0; i < a.size(); ++i) {
        int d1 = inf, d2 = inf;
        uint32_t jbest = 0;
        for (uint32_t j = 0; j < b.size(); ++j) {
            int d = hamming(a[i].descriptor, b[j].descriptor);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                jbest = j;
            } else if (d < d2) {
                d2 = d;
            }
            if (d < best_b_dist[j] || (d == best_b_dist[j] && i < best_b_from[j])) {
                best_b_dist[j] = d;
                best_b_from[j] = i;
            }
        }
        bool pass = d2 == inf ? true : static_cast<double>(d1) < cfg.match_ratio * d2;
        if (pass) candidates.emplace_back(i, jbest);
    }
    for (const auto& [i, j] : candidates) {
        if (best_b_from[j] == i) out.push_back({i, j});  // mutual best
    }
    return out;
}

GeometricResult filter_geometric(const std::vector<IndexPair>& matches,
                                 const std::vector<Keypoint>& a_keypoints,
                                 const std::vector<Keypoint>& b_keypoints,
                                 const DetectorConfig& cfg, uint64_t seed_override) {
    if (matches.size() < 4) return {matches, false};

    Rng rng(seed_override ? seed_override : cfg.seed);
    const double tol2 = cfg.inlier_px * cfg.inlier_px;
    const size_t n = matches.size();

    int best_count = 0;
    double best_model[6] = {0};
    std::vector<IndexPair> sample(4);
    for (int iter = 0; iter < cfg.ransac_iterations; ++iter) {
        uint32_t idx[4];
        for (int k = 0; k < 4; ++k) {
            bool fresh;
            do {
                idx[k] = static_cast<uint32_t>(rng.below(n));
                fresh = true;
                for (int p = 0; p < k; ++p) fresh = fresh && idx[p] != idx[k];
            } while (!fresh);
            sample[k] = matches[idx[k]];
        }
        double model[6];
        if (!fit_affine(sample, a_keypoints, b_keypoints, model)) continue;
        int count = count_inliers(model, matches, a_keypoints, b_keypoints, tol2, nullptr);
        if (count > best_count) {
            best_count = count;
            std::copy(model, model + 6, best_model);
        }
    }

    GeometricResult result;
    if (best_count >= 4) {
        count_inliers(best_model, matches, a_keypoints, b_keypoints, tol2, &result.inliers);
        result.consistent = true;
    } else {
        result.inliers = matches;
        result.consistent = false;
    }
    return result;
}

VisualMatrix build_visual_matrix(const std::vector<VisualAsset>& assets,
                                 const DetectorConfig& cfg) {
    const size_t n = assets.size();
    if (n < 2) throw TooFewImages("visual matrix needs at least two images");

    std::vector<std::vector<Keypoint>> keypoints(n);
    parallel_for(n, [&](size_t i) { keypoints[i] = detect(assets[i].raster, cfg); });

    struct Pair {
        size_t i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});

    std::vector<int> weights(pairs.size(), 0);
    parallel_for(pairs.size(), [&](size_t p) {
        const auto& [i, j] = pairs[p];
        if (keypoints[i].empty() || keypoints[j].empty()) return;
        auto matches = match_pair(keypoints[i], keypoints[j], cfg);
        if (matches.empty()) return;
        // pair seed from the sorted id pair, independent of schedule order
        const std::string& lo = std::min(assets[i].id, assets[j].id);
        const std::string& hi = std::max(assets[i].id, assets[j].id);
        uint64_t seed = fnv1a(hi, fnv1a(lo, cfg.seed ^ 0x9E3779B97F4A7C15ULL)) | 1ULL;
        auto fit = filter_geometric(matches, keypoints[i], keypoints[j], cfg, seed);
        weights[p] = fit.consistent ? static_cast<int>(fit.inliers.size()) : 0;
    });

    VisualMatrix m(n);
    for (size_t p = 0; p < pairs.size(); ++p)
        m.set_pair(pairs[p].i, pairs[p].j, weights[p]);
    return m;
}

VisualMatrix ingest_matrix(const std::string& json_text) {
    std::vector<std::string> ids;
    return ingest_matrix(json_text, ids);
}

VisualMatrix ingest_matrix(const std::string& json_text, std::vector<std::string>& ids_out) {
    MatrixDoc doc = matrix_from_json(json_text);
    if (doc.kind != "visual") throw SchemaError("matrix kind must be \"visual\"");
    const size_t n = doc.data.size();
    for (size_t i = 0; i < n; ++i) {
        if (doc.data[i][i] != 0) throw SchemaError("visual matrix must have a zero diagonal");
        for (size_t j = i + 1; j < n; ++j)
            if (doc.data[i][j] != doc.data[j][i])
                throw AsymmetryError("visual matrix must be symmetric");
    }
    VisualMatrix m(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) m.set_pair(i, j, doc.data[i][j]);
    ids_out = std::move(doc.ids);
    return m;
}

}  // namespace provgraph
