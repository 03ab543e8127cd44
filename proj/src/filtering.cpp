#include "provgraph/filtering.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "provgraph/common.hpp"
#include "provgraph/raster.hpp"

namespace provgraph {

namespace {

inline int hamming_masked(const Descriptor256& a, const Descriptor256& b,
                          const Descriptor256& mask) {
    int d = 0;
    for (int i = 0; i < 4; ++i)
        d += __builtin_popcountll((a.words[i] ^ b.words[i]) & mask.words[i]);
    return d;
}

Descriptor256 block_mask(uint32_t block, uint32_t block_bits) {
    Descriptor256 m;
    uint32_t lo = block * block_bits;
    for (uint32_t bit = lo; bit < lo + block_bits; ++bit)
        m.words[bit >> 6] |= 1ULL << (bit & 63);
    return m;
}

// Lloyd iterations in Hamming space: assignment by masked distance, centroid
// update by per-bit majority, empty cells re-seeded from the farthest point.
std::vector<Descriptor256> kmodes(const std::vector<Descriptor256>& data,
                                  const Descriptor256& mask, uint32_t k, uint32_t iters) {
    const size_t n = data.size();
    std::vector<Descriptor256> centers(k);

    // farthest-first seeding from the first point
    std::vector<int> min_dist(n, 1 << 30);
    size_t seed = 0;
    for (uint32_t c = 0; c < k; ++c) {
        centers[c] = data[seed % n];
        if (c + 1 == k) break;
        size_t far = 0;
        int far_d = -1;
        for (size_t i = 0; i < n; ++i) {
            int d = hamming_masked(data[i], centers[c], mask);
            if (d < min_dist[i]) min_dist[i] = d;
            if (min_dist[i] > far_d) {
                far_d = min_dist[i];
                far = i;
            }
        }
        seed = (far_d > 0) ? far : (seed + 1);
    }

    std::vector<uint32_t> assign(n, 0);
    std::vector<int> dist(n, 0);
    for (uint32_t it = 0; it < iters; ++it) {
        bool changed = false;
        for (size_t i = 0; i < n; ++i) {
            int best_d = 1 << 30;
            uint32_t best_c = 0;
            for (uint32_t c = 0; c < k; ++c) {
                int d = hamming_masked(data[i], centers[c], mask);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            if (it == 0 || assign[i] != best_c) changed = true;
            assign[i] = best_c;
            dist[i] = best_d;
        }

        std::vector<uint32_t> members(k, 0);
        std::vector<std::array<uint32_t, 256>> ones(k);
        for (auto& a : ones) a.fill(0);
        for (size_t i = 0; i < n; ++i) {
            ++members[assign[i]];
            for (int w = 0; w < 4; ++w) {
                uint64_t bits = data[i].words[w] & mask.words[w];
                while (bits) {
                    int b = __builtin_ctzll(bits);
                    ++ones[assign[i]][w * 64 + b];
                    bits &= bits - 1;
                }
            }
        }

        std::vector<bool> stolen(n, false);
        for (uint32_t c = 0; c < k; ++c) {
            if (members[c] == 0) {
                // steal the point farthest from its current centroid
                size_t far = 0;
                int far_d = -1;
                for (size_t i = 0; i < n; ++i) {
                    if (!stolen[i] && dist[i] > far_d) {
                        far_d = dist[i];
                        far = i;
                    }
                }
                if (far_d >= 0) {
                    centers[c] = data[far];
                    stolen[far] = true;
                }
                continue;
            }
            Descriptor256 nc;
            for (int bit = 0; bit < 256; ++bit) {
                if (!(mask.words[bit >> 6] & (1ULL << (bit & 63)))) continue;
                if (2 * ones[c][bit] > members[c]) nc.words[bit >> 6] |= 1ULL << (bit & 63);
            }
            if (!(nc == centers[c])) changed = true;
            centers[c] = nc;
        }
        if (!changed && it > 0) break;
    }
    return centers;
}

void push_u32le(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
}

uint32_t read_u32le(const std::vector<uint8_t>& b, size_t& pos) {
    if (pos + 4 > b.size()) throw SchemaError("truncated index file");
    uint32_t v = b[pos] | (b[pos + 1] << 8) | (b[pos + 2] << 16) |
                 (static_cast<uint32_t>(b[pos + 3]) << 24);
    pos += 4;
    return v;
}

void push_desc(std::vector<uint8_t>& out, const Descriptor256& d) {
    for (uint64_t w : d.words)
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((w >> (8 * i)) & 0xFF));
}

Descriptor256 read_desc(const std::vector<uint8_t>& b, size_t& pos) {
    if (pos + 32 > b.size()) throw SchemaError("truncated index file");
    Descriptor256 d;
    for (int w = 0; w < 4; ++w) {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[pos++]) << (8 * i);
        d.words[w] = v;
    }
    return d;
}

struct ScoreAccumulator {
    std::vector<double> score;
    explicit ScoreAccumulator(size_t n) : score(n, 0.0) {}
    void merge_max(const std::vector<double>& other) {
        for (size_t i = 0; i < score.size(); ++i) score[i] = std::max(score[i], other[i]);
    }
};

}  // namespace

QuantizedIndex QuantizedIndex::build(const std::vector<IndexedImage>& corpus,
                                     const PqConfig& cfg) {
    if (cfg.subquantizers == 0 || 256 % cfg.subquantizers != 0 || cfg.subquantizers > 32)
        throw ConfigError("subquantizer count must divide 256 and stay within 32");
    if (cfg.coarse_centroids == 0) throw ConfigError("coarse centroid count must be positive");

    size_t total = 0;
    for (const auto& img : corpus) total += img.descriptors.size();
    if (total < static_cast<size_t>(10) * cfg.coarse_centroids)
        throw InsufficientTrainingData("need at least 10 descriptors per coarse centroid");

    QuantizedIndex index;
    index.cfg_ = cfg;
    for (const auto& img : corpus) index.ids_.push_back(img.id);

    // deterministic strided training subsample
    std::vector<Descriptor256> all;
    all.reserve(total);
    for (const auto& img : corpus)
        all.insert(all.end(), img.descriptors.begin(), img.descriptors.end());
    std::vector<Descriptor256> train;
    if (all.size() > cfg.train_cap) {
        size_t stride = all.size() / cfg.train_cap;
        for (size_t i = 0; i < all.size() && train.size() < cfg.train_cap; i += stride)
            train.push_back(all[i]);
    } else {
        train = all;
    }

    Descriptor256 full_mask;
    full_mask.words.fill(~0ULL);
    index.coarse_ = kmodes(train, full_mask, cfg.coarse_centroids, cfg.kmeans_iterations);

    const uint32_t m = cfg.subquantizers;
    const uint32_t block_bits = 256 / m;
    index.sub_.resize(static_cast<size_t>(m) * 256);
    for (uint32_t j = 0; j < m; ++j) {
        Descriptor256 mask = block_mask(j, block_bits);
        auto cents = kmodes(train, mask, 256, cfg.kmeans_iterations);
        for (uint32_t c = 0; c < 256; ++c) index.sub_[j * 256 + c] = cents[c];
    }

    index.cell_image_.resize(cfg.coarse_centroids);
    index.cell_code_.resize(cfg.coarse_centroids);
    std::vector<Descriptor256> masks;
    for (uint32_t j = 0; j < m; ++j) masks.push_back(block_mask(j, block_bits));

    for (uint32_t img = 0; img < corpus.size(); ++img) {
        for (const auto& d : corpus[img].descriptors) {
            uint32_t cell = 0;
            int best = 1 << 30;
            for (uint32_t c = 0; c < cfg.coarse_centroids; ++c) {
                int dist = hamming(d, index.coarse_[c]);
                if (dist < best) {
                    best = dist;
                    cell = c;
                }
            }
            index.cell_image_[cell].push_back(img);
            for (uint32_t j = 0; j < m; ++j) {
                uint32_t code = 0;
                int bd = 1 << 30;
                for (uint32_t c = 0; c < 256; ++c) {
                    int dist = hamming_masked(d, index.sub_[j * 256 + c], masks[j]);
                    if (dist < bd) {
                        bd = dist;
                        code = c;
                    }
                }
                index.cell_code_[cell].push_back(static_cast<uint8_t>(code));
            }
        }
    }
    return index;
}

std::vector<Descriptor256> QuantizedIndex::reconstruct(uint32_t image_index) const {
    const uint32_t m = cfg_.subquantizers;
    std::vector<Descriptor256> out;
    for (size_t cell = 0; cell < cell_image_.size(); ++cell) {
        const auto& imgs = cell_image_[cell];
        for (size_t p = 0; p < imgs.size(); ++p) {
            if (imgs[p] != image_index) continue;
            Descriptor256 d;
            for (uint32_t j = 0; j < m; ++j) {
                uint8_t code = cell_code_[cell][p * m + j];
                const Descriptor256& c = sub_centroid(j, code);
                for (int w = 0; w < 4; ++w) d.words[w] |= c.words[w];
            }
            out.push_back(d);
        }
    }
    return out;
}

std::vector<uint8_t> QuantizedIndex::serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'P', 'V', 'I', 'X'});
    out.push_back(1);  // version
    push_u32le(out, cfg_.coarse_centroids);
    push_u32le(out, cfg_.subquantizers);
    push_u32le(out, cfg_.kmeans_iterations);
    push_u32le(out, cfg_.nprobe);
    push_u32le(out, cfg_.expansion_breadth);
    push_u32le(out, cfg_.train_cap);
    push_u32le(out, static_cast<uint32_t>(ids_.size()));
    for (const auto& id : ids_) {
        push_u32le(out, static_cast<uint32_t>(id.size()));
        out.insert(out.end(), id.begin(), id.end());
    }
    for (const auto& c : coarse_) push_desc(out, c);
    for (const auto& c : sub_) push_desc(out, c);
    for (size_t cell = 0; cell < cell_image_.size(); ++cell) {
        push_u32le(out, static_cast<uint32_t>(cell_image_[cell].size()));
        for (size_t p = 0; p < cell_image_[cell].size(); ++p) {
            push_u32le(out, cell_image_[cell][p]);
            for (uint32_t j = 0; j < cfg_.subquantizers; ++j)
                out.push_back(cell_code_[cell][p * cfg_.subquantizers + j]);
        }
    }
    return out;
}

QuantizedIndex QuantizedIndex::deserialize(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    if (bytes.size() < 5 || std::memcmp(bytes.data(), "PVIX", 4) != 0)
        throw SchemaError("not a PVIX index file");
    pos = 4;
    if (bytes[pos++] != 1) throw SchemaError("unsupported PVIX version");

    QuantizedIndex index;
    index.cfg_.coarse_centroids = read_u32le(bytes, pos);
    index.cfg_.subquantizers = read_u32le(bytes, pos);
    index.cfg_.kmeans_iterations = read_u32le(bytes, pos);
    index.cfg_.nprobe = read_u32le(bytes, pos);
    index.cfg_.expansion_breadth = read_u32le(bytes, pos);
    index.cfg_.train_cap = read_u32le(bytes, pos);
    if (index.cfg_.subquantizers == 0 || 256 % index.cfg_.subquantizers != 0 ||
        index.cfg_.subquantizers > 32)
        throw SchemaError("corrupt PVIX header");

    uint32_t n_images = read_u32le(bytes, pos);
    for (uint32_t i = 0; i < n_images; ++i) {
        uint32_t len = read_u32le(bytes, pos);
        if (pos + len > bytes.size()) throw SchemaError("truncated index file");
        index.ids_.emplace_back(bytes.begin() + pos, bytes.begin() + pos + len);
        pos += len;
    }
    for (uint32_t c = 0; c < index.cfg_.coarse_centroids; ++c)
        index.coarse_.push_back(read_desc(bytes, pos));
    for (uint32_t c = 0; c < index.cfg_.subquantizers * 256u; ++c)
        index.sub_.push_back(read_desc(bytes, pos));

    index.cell_image_.resize(index.cfg_.coarse_centroids);
    index.cell_code_.resize(index.cfg_.coarse_centroids);
    for (uint32_t cell = 0; cell < index.cfg_.coarse_centroids; ++cell) {
        uint32_t count = read_u32le(bytes, pos);
        for (uint32_t p = 0; p < count; ++p) {
            uint32_t img = read_u32le(bytes, pos);
            if (img >= n_images) throw SchemaError("posting references unknown image");
            index.cell_image_[cell].push_back(img);
            if (pos + index.cfg_.subquantizers > bytes.size())
                throw SchemaError("truncated index file");
            for (uint32_t j = 0; j < index.cfg_.subquantizers; ++j)
                index.cell_code_[cell].push_back(bytes[pos++]);
        }
    }
    return index;
}

void QuantizedIndex::save(const std::string& path) const { write_file(path, serialize()); }

QuantizedIndex QuantizedIndex::load(const std::string& path) {
    return deserialize(read_file(path));
}

namespace {

// One scoring pass of a descriptor set against the index, max-normalized so
// passes driven by raw descriptors and by reconstructed (codebook-exact)
// descriptors merge on a comparable scale.
std::vector<double> score_pass(const QuantizedIndex& index,
                               const std::vector<Descriptor256>& descriptors) {
    const auto& cfg = index.config();
    const uint32_t m = cfg.subquantizers;
    const uint32_t block_bits = 256 / m;
    const uint32_t nprobe = std::min<uint32_t>(cfg.nprobe, cfg.coarse_centroids);

    std::vector<Descriptor256> masks;
    for (uint32_t j = 0; j < m; ++j) masks.push_back(block_mask(j, block_bits));

    std::vector<double> scores(index.image_count(), 0.0);
    std::vector<std::pair<int, uint32_t>> cell_dist(cfg.coarse_centroids);
    std::vector<std::array<int, 256>> lut(m);

    for (const auto& q : descriptors) {
        for (uint32_t c = 0; c < cfg.coarse_centroids; ++c)
            cell_dist[c] = {hamming(q, index.coarse_centroids()[c]), c};
        std::partial_sort(cell_dist.begin(), cell_dist.begin() + nprobe, cell_dist.end());

        for (uint32_t j = 0; j < m; ++j)
            for (uint32_t c = 0; c < 256; ++c)
                lut[j][c] = hamming_masked(q, index.sub_centroid(j, c), masks[j]);

        for (uint32_t p = 0; p < nprobe; ++p) {
            uint32_t cell = cell_dist[p].second;
            const auto& imgs = index.cell_images()[cell];
            const auto& codes = index.cell_codes()[cell];
            for (size_t post = 0; post < imgs.size(); ++post) {
                int dist = 0;
                const uint8_t* code = codes.data() + post * m;
                for (uint32_t j = 0; j < m; ++j) dist += lut[j][code[j]];
                scores[imgs[post]] += 1.0 / (1.0 + dist);
            }
        }
    }

    double top = 0.0;
    for (double s : scores) top = std::max(top, s);
    if (top > 0.0)
        for (double& s : scores) s /= top;
    return scores;
}

std::vector<uint32_t> rank_images(const std::vector<double>& scores) {
    std::vector<uint32_t> order(scores.size());
    for (uint32_t i = 0; i < scores.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

}  // namespace

RankedList query(const QuantizedIndex& index, const IndexedImage& query_asset, size_t k,
                 int stages) {
    if (index.image_count() == 0) throw EmptyIndex("index holds no images");
    if (k < 1) throw ConfigError("k must be at least 1");
    if (stages < 1) throw ConfigError("stages must be at least 1");
    if (query_asset.descriptors.empty())
        throw EmptyKeypoints("query image yields no descriptors");

    const auto& cfg = index.config();
    std::vector<double> acc = score_pass(index, query_asset.descriptors);
    std::vector<bool> seen(index.image_count(), false);

    for (int s = 2; s <= stages; ++s) {
        auto order = rank_images(acc);
        std::vector<uint32_t> subqueries;
        for (uint32_t img : order) {
            if (subqueries.size() >= cfg.expansion_breadth) break;
            if (seen[img] || acc[img] <= 0.0) continue;
            if (index.ids()[img] == query_asset.id) continue;
            subqueries.push_back(img);
        }
        if (subqueries.empty()) break;
        for (uint32_t img : subqueries) {
            seen[img] = true;
            auto descs = index.reconstruct(img);
            if (descs.empty()) continue;
            auto pass = score_pass(index, descs);
            for (size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], pass[i]);
        }
    }

    RankedList out;
    out.query_id = query_asset.id;
    auto order = rank_images(acc);
    for (uint32_t img : order) {
        if (out.entries.size() >= k) break;
        if (index.ids()[img] == query_asset.id) continue;
        out.entries.push_back({index.ids()[img], acc[img]});
    }
    return out;
}

}  // namespace provgraph
