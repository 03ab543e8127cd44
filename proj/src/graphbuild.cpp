#include "provgraph/graphbuild.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "provgraph/common.hpp"

namespace provgraph {

namespace {

// Kahn's algorithm; throws on a cycle.
void check_acyclic(size_t n, const std::vector<GraphEdge>& edges) {
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<uint32_t>> adj(n);
    for (const auto& e : edges) {
        adj[e.from].push_back(e.to);
        ++indegree[e.to];
    }
    std::vector<uint32_t> queue;
    for (size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) queue.push_back(static_cast<uint32_t>(i));
    size_t seen = 0;
    while (!queue.empty()) {
        uint32_t u = queue.back();
        queue.pop_back();
        ++seen;
        for (uint32_t v : adj[u])
            if (--indegree[v] == 0) queue.push_back(v);
    }
    if (seen != n) throw CycleDetected("graph contains a cycle");
}

struct UnionFind {
    std::vector<uint32_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

}  // namespace

ProvenanceGraph ProvenanceGraph::make(std::vector<std::string> node_ids,
                                      std::vector<GraphEdge> edges) {
    const size_t n = node_ids.size();
    for (const auto& e : edges) {
        if (e.from >= n || e.to >= n) throw InvalidQueryIndex("edge endpoint out of range");
        if (e.from == e.to) throw CycleDetected("self loop");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    check_acyclic(n, edges);

    ProvenanceGraph g;
    g.ids_ = std::move(node_ids);
    g.edges_ = std::move(edges);
    return g;
}

ProvenanceGraph kruskal_build(const VoteMatrix& m, const std::vector<std::string>& ids) {
    const size_t n = m.size();
    if (n < 2) throw TooFewImages("graph construction needs at least two images");
    if (ids.size() != n) throw SizeMismatch("ids do not match matrix size");

    struct Candidate {
        int weight;
        uint32_t i, j;
    };
    std::vector<Candidate> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t j = i + 1; j < n; ++j) {
            int w = std::max(m.at(i, j), m.at(j, i));
            if (w > 0) pairs.push_back({w, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Candidate& a, const Candidate& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    UnionFind uf(n);
    std::vector<GraphEdge> edges;
    for (const auto& c : pairs) {
        if (!uf.unite(c.i, c.j)) continue;
        if (m.at(c.i, c.j) >= m.at(c.j, c.i)) edges.push_back({c.i, c.j});
        else edges.push_back({c.j, c.i});
    }
    return ProvenanceGraph::make(ids, std::move(edges));
}

ProvenanceGraph cluster_expand_build(const VisualMatrix& d, const VoteMatrix& m,
                                     size_t query_index, const std::vector<std::string>& ids,
                                     int theta) {
    const size_t n = d.size();
    if (m.size() != n || ids.size() != n) throw SizeMismatch("matrix sizes do not match");
    if (query_index >= n) throw InvalidQueryIndex("query index out of range");

    std::vector<bool> in_graph(n, false);
    in_graph[query_index] = true;
    std::vector<uint32_t> members{static_cast<uint32_t>(query_index)};
    std::vector<GraphEdge> edges;

    for (;;) {
        int best_w = 0;
        uint32_t best_u = 0, best_v = 0;
        bool found = false;
        for (uint32_t u : members) {
            for (uint32_t v = 0; v < n; ++v) {
                if (in_graph[v]) continue;
                int w = d.at(u, v);
                if (w < theta) continue;
                if (!found || w > best_w || (w == best_w && (u < best_u || (u == best_u && v < best_v)))) {
                    best_w = w;
                    best_u = u;
                    best_v = v;
                    found = true;
                }
            }
        }
        if (!found) break;
        if (m.at(best_v, best_u) > m.at(best_u, best_v)) edges.push_back({best_v, best_u});
        else edges.push_back({best_u, best_v});  // tie flows outward from the graph
        in_graph[best_v] = true;
        members.push_back(best_v);
    }

    // Unreached nodes drop out of the case.
    std::sort(members.begin(), members.end());
    std::vector<std::string> kept_ids;
    std::vector<uint32_t> remap(n, 0);
    for (uint32_t v : members) {
        remap[v] = static_cast<uint32_t>(kept_ids.size());
        kept_ids.push_back(ids[v]);
    }
    for (auto& e : edges) {
        e.from = remap[e.from];
        e.to = remap[e.to];
    }
    return ProvenanceGraph::make(std::move(kept_ids), std::move(edges));
}

BinaryAdjacency to_bam(const ProvenanceGraph& g) {
    BinaryAdjacency b;
    b.size = g.order();
    b.bits.assign(b.size * b.size, 0);
    for (const auto& e : g.edges()) b.bits[e.from * b.size + e.to] = 1;
    return b;
}

ProvenanceGraph from_bam(const BinaryAdjacency& b, const std::vector<std::string>& ids) {
    if (ids.size() != b.size) throw SizeMismatch("ids do not match BAM size");
    std::vector<GraphEdge> edges;
    for (uint32_t i = 0; i < b.size; ++i)
        for (uint32_t j = 0; j < b.size; ++j)
            if (b.bits[i * b.size + j]) {
                if (i == j) throw CycleDetected("BAM has a self loop");
                edges.push_back({i, j});
            }
    return ProvenanceGraph::make(ids, std::move(edges));
}

std::string bam_to_json(const BinaryAdjacency& b, const std::vector<std::string>& ids) {
    if (ids.size() != b.size) throw SizeMismatch("ids do not match BAM size");
    nlohmann::json j;
    j["ids"] = ids;
    std::vector<std::vector<int>> rows(b.size, std::vector<int>(b.size, 0));
    for (size_t i = 0; i < b.size; ++i)
        for (size_t jx = 0; jx < b.size; ++jx) rows[i][jx] = b.bits[i * b.size + jx];
    j["bam"] = rows;
    return j.dump(1);
}

std::pair<BinaryAdjacency, std::vector<std::string>> bam_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("unparseable BAM document: ") + e.what());
    }
    if (!j.is_object() || !j.contains("ids") || !j.contains("bam"))
        throw SchemaError("BAM document needs ids and bam");
    std::vector<std::string> ids;
    for (const auto& id : j["ids"]) {
        if (!id.is_string()) throw SchemaError("ids must be strings");
        ids.push_back(id.get<std::string>());
    }
    const auto& rows = j["bam"];
    if (!rows.is_array() || rows.size() != ids.size())
        throw SchemaError("bam must be square and match ids");
    BinaryAdjacency b;
    b.size = ids.size();
    b.bits.assign(b.size * b.size, 0);
    for (size_t i = 0; i < b.size; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != b.size)
            throw SchemaError("bam must be square and match ids");
        for (size_t jx = 0; jx < b.size; ++jx) {
            if (!row[jx].is_number_integer()) throw SchemaError("bam entries must be 0 or 1");
            int64_t v = row[jx].get<int64_t>();
            if (v != 0 && v != 1) throw SchemaError("bam entries must be 0 or 1");
            b.bits[i * b.size + jx] = static_cast<uint8_t>(v);
        }
    }
    return {std::move(b), std::move(ids)};
}

std::string to_dot(const ProvenanceGraph& g) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return out;
    };
    std::string dot = "digraph provenance {\n";
    for (const auto& id : g.node_ids()) dot += "  " + quote(id) + ";\n";
    for (const auto& e : g.edges())
        dot += "  " + quote(g.node_ids()[e.from]) + " -> " + quote(g.node_ids()[e.to]) + ";\n";
    dot += "}\n";
    return dot;
}

}  // namespace provgraph
