#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "provgraph/common.hpp"
#include "provgraph/graphbuild.hpp"

#include "helpers.hpp"

using namespace provgraph;
using namespace provgraph::testing;

namespace {

std::vector<std::string> ids_for(size_t n) {
    std::vector<std::string> ids;
    for (size_t i = 0; i < n; ++i) ids.push_back("n" + std::to_string(i));
    return ids;
}

// Decodes one Pruefer sequence into tree edges; with it the oracle can walk
// every labeled tree on n nodes.
std::vector<std::pair<int, int>> pruefer_tree(const std::vector<int>& seq, int n) {
    std::vector<int> degree(n, 1);
    for (int s : seq) ++degree[s];
    std::vector<std::pair<int, int>> edges;
    for (int s : seq) {
        for (int j = 0; j < n; ++j) {
            if (degree[j] == 1) {
                edges.push_back({j, s});
                --degree[j];
                --degree[s];
                break;
            }
        }
    }
    int u = -1;
    for (int j = 0; j < n; ++j)
        if (degree[j] == 1) {
            if (u < 0) u = j;
            else edges.push_back({u, j});
        }
    return edges;
}

// Maximum total symmetrized weight over all spanning trees, by enumeration.
long brute_force_max_tree_weight(const VoteMatrix& m) {
    const int n = static_cast<int>(m.size());
    auto w = [&](int i, int j) { return std::max(m.at(i, j), m.at(j, i)); };
    if (n == 2) return w(0, 1);

    long best = -1;
    std::vector<int> seq(n - 2, 0);
    for (;;) {
        auto edges = pruefer_tree(seq, n);
        long total = 0;
        for (auto [i, j] : edges) total += w(i, j);
        best = std::max(best, total);

        int pos = n - 3;
        while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
        if (pos < 0) break;
        ++seq[pos];
    }
    return best;
}

long kruskal_total_weight(const VoteMatrix& m, const ProvenanceGraph& g) {
    long total = 0;
    for (const auto& e : g.edges()) total += std::max(m.at(e.from, e.to), m.at(e.to, e.from));
    return total;
}

int positive_components(const VoteMatrix& m) {
    const int n = static_cast<int>(m.size());
    std::vector<int> comp(n, -1);
    int count = 0;
    for (int start = 0; start < n; ++start) {
        if (comp[start] >= 0) continue;
        std::vector<int> stack{start};
        comp[start] = count;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (comp[v] < 0 && std::max(m.at(u, v), m.at(v, u)) > 0) {
                    comp[v] = count;
                    stack.push_back(v);
                }
            }
        }
        ++count;
    }
    return count;
}

VoteMatrix random_votes(Rng& rng, size_t n, int max_vote = 9) {
    VoteMatrix m(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (i != j) m.set(i, j, static_cast<int>(rng.below(max_vote + 1)));
    return m;
}

// Minimal DOT grammar oracle: digraph IDENT { ( "id" ; | "id" -> "id" ; )* }
bool valid_dot(const std::string& text) {
    size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t'))
            ++pos;
    };
    auto literal = [&](const std::string& word) {
        skip_ws();
        if (text.compare(pos, word.size(), word) != 0) return false;
        pos += word.size();
        return true;
    };
    auto quoted = [&] {
        skip_ws();
        if (pos >= text.size() || text[pos] != '"') return false;
        ++pos;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\') ++pos;
            ++pos;
        }
        if (pos >= text.size()) return false;
        ++pos;
        return true;
    };
    if (!literal("digraph")) return false;
    skip_ws();
    while (pos < text.size() && (isalnum(text[pos]) || text[pos] == '_')) ++pos;
    if (!literal("{")) return false;
    for (;;) {
        skip_ws();
        if (pos < text.size() && text[pos] == '}') {
            ++pos;
            skip_ws();
            return pos == text.size();
        }
        if (!quoted()) return false;
        skip_ws();
        if (pos + 1 < text.size() && text[pos] == '-' && text[pos + 1] == '>') {
            pos += 2;
            if (!quoted()) return false;
        }
        if (!literal(";")) return false;
    }
}

}  // namespace

TEST_CASE("kruskal two-node and chain examples") {
    VoteMatrix two(2);
    two.set(0, 1, 3);
    auto g = kruskal_build(two, ids_for(2));
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0] == GraphEdge{0, 1});

    VoteMatrix chain(3);
    chain.set(0, 1, 3);
    chain.set(1, 2, 3);
    chain.set(0, 2, 1);
    CHECK(brute_force_max_tree_weight(chain) == 6);
    auto gc = kruskal_build(chain, ids_for(3));
    std::vector<GraphEdge> expect{{0, 1}, {1, 2}};
    CHECK(gc.edges() == expect);
}

TEST_CASE("kruskal tie-break trace on a symmetric matrix") {
    VoteMatrix m(3);
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j)
            if (i != j) m.set(i, j, 1);
    auto g = kruskal_build(m, ids_for(3));
    CHECK(kruskal_total_weight(m, g) == 2);
    // pairs sort (0,1) < (0,2) < (1,2); directions break toward smaller index
    std::vector<GraphEdge> expect{{0, 1}, {0, 2}};
    CHECK(g.edges() == expect);
}

TEST_CASE("kruskal equals brute-force enumeration on random matrices") {
    Rng rng(2024);
    for (int trial = 0; trial < 80; ++trial) {
        size_t n = 2 + rng.below(6);  // up to 7 nodes
        VoteMatrix m = random_votes(rng, n);
        auto g = kruskal_build(m, ids_for(n));
        CHECK(g.edges().size() ==
              n - static_cast<size_t>(positive_components(m)));
        if (positive_components(m) == 1)
            CHECK(kruskal_total_weight(m, g) == brute_force_max_tree_weight(m));
    }
}

TEST_CASE("kruskal direction follows the vote comparison and survives scaling") {
    Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        size_t n = 2 + rng.below(5);
        VoteMatrix m = random_votes(rng, n);
        auto g = kruskal_build(m, ids_for(n));
        for (const auto& e : g.edges()) CHECK(m.at(e.from, e.to) >= m.at(e.to, e.from));

        VoteMatrix scaled(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) scaled.set(i, j, m.at(i, j) * 17);
        CHECK(kruskal_build(scaled, ids_for(n)).edges() == g.edges());
    }
}

TEST_CASE("kruskal all-zero votes yields isolated nodes") {
    VoteMatrix m(4);
    auto g = kruskal_build(m, ids_for(4));
    CHECK(g.order() == 4);
    CHECK(g.edges().empty());
    CHECK_THROWS_AS(kruskal_build(VoteMatrix(1), ids_for(1)), TooFewImages);
}

TEST_CASE("cluster expansion forced single edge") {
    VisualMatrix d(2);
    d.set_pair(0, 1, 50);
    VoteMatrix m(2);
    m.set(0, 1, 4);
    m.set(1, 0, 1);
    auto g = cluster_expand_build(d, m, 0, ids_for(2));
    REQUIRE(g.edges().size() == 1);
    CHECK(g.edges()[0] == GraphEdge{0, 1});
}

TEST_CASE("cluster expansion excludes below-threshold nodes") {
    // query 0 strongly linked to 1,2,3; node 4 sits below theta
    VisualMatrix d(5);
    d.set_pair(0, 1, 40);
    d.set_pair(0, 2, 30);
    d.set_pair(0, 3, 20);
    d.set_pair(0, 4, 3);
    VoteMatrix m(5);
    auto g = cluster_expand_build(d, m, 0, ids_for(5));
    CHECK(g.order() == 4);
    std::set<std::string> nodes(g.node_ids().begin(), g.node_ids().end());
    CHECK_FALSE(nodes.count("n4"));
    CHECK(nodes.count("n0"));
    // ties in m point outward from the growing graph
    for (const auto& e : g.edges()) CHECK(g.node_ids()[e.from] == "n0");
}

TEST_CASE("cluster expansion direction flips with reversed votes") {
    VisualMatrix d(3);
    d.set_pair(0, 1, 20);
    d.set_pair(1, 2, 15);
    VoteMatrix m(3);
    m.set(0, 1, 5);
    m.set(1, 2, 5);
    auto g1 = cluster_expand_build(d, m, 0, ids_for(3));

    VoteMatrix rev(3);
    rev.set(1, 0, 5);
    rev.set(2, 1, 5);
    auto g2 = cluster_expand_build(d, rev, 0, ids_for(3));

    std::vector<GraphEdge> forward{{0, 1}, {1, 2}};
    std::vector<GraphEdge> backward{{1, 0}, {2, 1}};
    CHECK(g1.edges() == forward);
    CHECK(g2.edges() == backward);
}

TEST_CASE("cluster expansion always contains the query and stays acyclic") {
    Rng rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        size_t n = 2 + rng.below(7);
        VisualMatrix d(n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                d.set_pair(i, j, static_cast<int>(rng.below(30)));
        VoteMatrix m = random_votes(rng, n);
        size_t q = rng.below(n);
        auto g = cluster_expand_build(d, m, q, ids_for(n));
        std::set<std::string> nodes(g.node_ids().begin(), g.node_ids().end());
        CHECK(nodes.count("n" + std::to_string(q)));
        CHECK(g.edges().size() == g.order() - 1);  // expansion grows a tree
    }
    CHECK_THROWS_AS(cluster_expand_build(VisualMatrix(3), VoteMatrix(2), 0, ids_for(3)),
                    SizeMismatch);
    CHECK_THROWS_AS(cluster_expand_build(VisualMatrix(3), VoteMatrix(3), 9, ids_for(3)),
                    InvalidQueryIndex);
}

TEST_CASE("BAM round trip and cycle detection") {
    auto ids = ids_for(3);
    auto g = ProvenanceGraph::make(ids, {{0, 1}, {1, 2}});
    auto bam = to_bam(g);
    CHECK(from_bam(bam, ids) == g);
    CHECK(bam.get(0, 1));
    CHECK_FALSE(bam.get(1, 0));

    auto empty = ProvenanceGraph::make(ids, {});
    auto empty_bam = to_bam(empty);
    CHECK(std::count(empty_bam.bits.begin(), empty_bam.bits.end(), 1) == 0);

    BinaryAdjacency mutual;
    mutual.size = 2;
    mutual.bits = {0, 1, 1, 0};
    CHECK_THROWS_AS(from_bam(mutual, ids_for(2)), CycleDetected);

    // serialized form
    std::string json = bam_to_json(bam, ids);
    auto [back, back_ids] = bam_from_json(json);
    CHECK(back == bam);
    CHECK(back_ids == ids);
}

TEST_CASE("graph validation rejects bad structures") {
    auto ids = ids_for(3);
    CHECK_THROWS_AS(ProvenanceGraph::make(ids, {{0, 0}}), CycleDetected);
    CHECK_THROWS_AS(ProvenanceGraph::make(ids, {{0, 1}, {1, 2}, {2, 0}}), CycleDetected);
    CHECK_THROWS_AS(ProvenanceGraph::make(ids, {{0, 7}}), InvalidQueryIndex);
    // duplicate edges collapse
    auto g = ProvenanceGraph::make(ids, {{0, 1}, {0, 1}});
    CHECK(g.edges().size() == 1);
}

TEST_CASE("DOT output passes a grammar check") {
    auto empty = ProvenanceGraph::make({}, {});
    CHECK(valid_dot(to_dot(empty)));

    auto ids = ids_for(2);
    auto one = ProvenanceGraph::make(ids, {{0, 1}});
    std::string dot = to_dot(one);
    CHECK(valid_dot(dot));
    CHECK(dot.find("\"n0\" -> \"n1\";") != std::string::npos);

    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        size_t n = 1 + rng.below(8);
        std::vector<GraphEdge> edges;
        for (uint32_t j = 1; j < n; ++j)
            edges.push_back({static_cast<uint32_t>(rng.below(j)), j});
        auto g = ProvenanceGraph::make(ids_for(n), edges);
        CHECK(valid_dot(to_dot(g)));
    }
}
