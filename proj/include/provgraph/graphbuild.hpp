#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provgraph/heuristics.hpp"

namespace provgraph {

// Symmetric N x N matrix of geometrically consistent match counts.
class VisualMatrix {
public:
    VisualMatrix() = default;
    explicit VisualMatrix(size_t n) : n_(n), v_(n * n, 0) {}

    size_t size() const { return n_; }
    int at(size_t i, size_t j) const { return v_[i * n_ + j]; }
    void set_pair(size_t i, size_t j, int w) {
        v_[i * n_ + j] = w;
        v_[j * n_ + i] = w;
    }

    bool operator==(const VisualMatrix&) const = default;

private:
    size_t n_ = 0;
    std::vector<int> v_;
};

struct GraphEdge {
    uint32_t from = 0;
    uint32_t to = 0;
    auto operator<=>(const GraphEdge&) const = default;
};

// Directed acyclic graph over asset identifiers. Construction validates:
// endpoints in range, no self loops, no duplicates, no cycles.
class ProvenanceGraph {
public:
    static ProvenanceGraph make(std::vector<std::string> node_ids, std::vector<GraphEdge> edges);

    const std::vector<std::string>& node_ids() const { return ids_; }
    const std::vector<GraphEdge>& edges() const { return edges_; }  // sorted, unique
    size_t order() const { return ids_.size(); }

    bool operator==(const ProvenanceGraph&) const = default;

private:
    std::vector<std::string> ids_;
    std::vector<GraphEdge> edges_;
};

struct BinaryAdjacency {
    size_t size = 0;
    std::vector<uint8_t> bits;  // row-major, bits[i*size+j] = 1 for edge i -> j

    bool get(size_t i, size_t j) const { return bits[i * size + j] != 0; }
    bool operator==(const BinaryAdjacency&) const = default;
};

// Kruskal maximum spanning forest over max-symmetrized votes. Positive-weight
// pairs only become edges; every node is kept, so components with no vote
// support stay as isolated nodes. Edge direction follows the larger vote
// count, smaller index -> larger index on ties.
ProvenanceGraph kruskal_build(const VoteMatrix& m, const std::vector<std::string>& ids);

// Greedy expansion from the query node over the visual matrix: repeatedly
// attach the heaviest edge (weight >= theta) joining the graph to a new node;
// edge orientation compares metadata votes, ties point outward from the graph.
ProvenanceGraph cluster_expand_build(const VisualMatrix& d, const VoteMatrix& m,
                                     size_t query_index, const std::vector<std::string>& ids,
                                     int theta = 8);

BinaryAdjacency to_bam(const ProvenanceGraph& g);
ProvenanceGraph from_bam(const BinaryAdjacency& b, const std::vector<std::string>& ids);

std::string bam_to_json(const BinaryAdjacency& b, const std::vector<std::string>& ids);
std::pair<BinaryAdjacency, std::vector<std::string>> bam_from_json(const std::string& json_text);

std::string to_dot(const ProvenanceGraph& g);

}  // namespace provgraph
