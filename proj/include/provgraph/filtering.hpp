#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provgraph/visual.hpp"

namespace provgraph {

struct PqConfig {
    uint32_t coarse_centroids = 256;  // C: inverted-file cells
    uint32_t subquantizers = 8;       // m: codebooks over 256/m-bit sub-blocks
    uint32_t kmeans_iterations = 10;
    uint32_t nprobe = 4;              // coarse cells probed per descriptor
    uint32_t expansion_breadth = 5;   // e: sub-queries taken per extra stage
    uint32_t train_cap = 65536;       // training subsample ceiling
};

struct IndexedImage {
    std::string id;
    std::vector<Descriptor256> descriptors;
};

// Inverted file over coarse-quantized descriptor cells; every indexed
// descriptor is stored once as an m-byte product-quantization code. All
// clustering runs in Hamming space (bit-majority centroid updates), so the
// whole structure is integer-exact and reproducible.
class QuantizedIndex {
public:
    static QuantizedIndex build(const std::vector<IndexedImage>& corpus, const PqConfig& cfg);

    const std::vector<std::string>& ids() const { return ids_; }
    const PqConfig& config() const { return cfg_; }
    size_t image_count() const { return ids_.size(); }

    const std::vector<std::vector<uint32_t>>& cell_images() const { return cell_image_; }
    const std::vector<std::vector<uint8_t>>& cell_codes() const { return cell_code_; }
    const std::vector<Descriptor256>& coarse_centroids() const { return coarse_; }
    // subquantizer j, code c -> prototype with bits placed in sub-block j
    const Descriptor256& sub_centroid(uint32_t j, uint32_t c) const { return sub_[j * 256 + c]; }

    std::vector<uint8_t> serialize() const;
    static QuantizedIndex deserialize(const std::vector<uint8_t>& bytes);
    void save(const std::string& path) const;
    static QuantizedIndex load(const std::string& path);

    // Approximate descriptors of an indexed image, reconstructed from its
    // codes; used to re-query during expansion stages.
    std::vector<Descriptor256> reconstruct(uint32_t image_index) const;

private:
    PqConfig cfg_;
    std::vector<std::string> ids_;
    std::vector<Descriptor256> coarse_;              // C entries
    std::vector<Descriptor256> sub_;                 // m * 256 entries, in-place bits
    std::vector<std::vector<uint32_t>> cell_image_;  // per cell: image index per posting
    std::vector<std::vector<uint8_t>> cell_code_;    // per cell: m bytes per posting
};

struct RankedEntry {
    std::string image_id;
    double score = 0.0;
};

struct RankedList {
    std::string query_id;
    std::vector<RankedEntry> entries;  // descending score, query_id excluded
};

// Multi-stage retrieval: stage 1 scores the corpus against the query
// descriptors (sum of 1 / (1 + quantized distance) over postings in the
// probed cells); each further stage re-queries with the top-e previously
// unseen results and merges scores by maximum. Returns the top-k.
RankedList query(const QuantizedIndex& index, const IndexedImage& query_asset, size_t k,
                 int stages);

}  // namespace provgraph
