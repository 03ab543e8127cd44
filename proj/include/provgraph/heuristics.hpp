#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "provgraph/tags.hpp"

namespace provgraph {

// Directional vote counts for one ordered pair: ab votes for (a -> b),
// ba votes for (b -> a).
struct VotePair {
    int ab = 0;
    int ba = 0;
    bool operator==(const VotePair&) const = default;
};

struct HeuristicSet {
    bool date = true;
    bool location = true;
    bool camera = true;
    bool editing = true;
    bool thumbnail = true;

    bool any() const { return date || location || camera || editing || thumbnail; }

    static HeuristicSet none() { return {false, false, false, false, false}; }
    static HeuristicSet all() { return {}; }
    static HeuristicSet only_date() { return {true, false, false, false, false}; }
    static HeuristicSet only_location() { return {false, true, false, false, false}; }
    static HeuristicSet only_camera() { return {false, false, true, false, false}; }
    static HeuristicSet only_editing() { return {false, false, false, true, false}; }
    static HeuristicSet only_thumbnail() { return {false, false, false, false, true}; }
};

HeuristicSet heuristic_set_from_names(const std::vector<std::string>& names);
std::vector<std::string> heuristic_names(const HeuristicSet& set);

// Asymmetric N x N integer matrix of metadata votes, zero diagonal.
class VoteMatrix {
public:
    VoteMatrix() = default;
    explicit VoteMatrix(size_t n) : n_(n), v_(n * n, 0) {}

    size_t size() const { return n_; }
    int at(size_t i, size_t j) const { return v_[i * n_ + j]; }
    void add(size_t i, size_t j, int votes) { v_[i * n_ + j] += votes; }
    void set(size_t i, size_t j, int votes) { v_[i * n_ + j] = votes; }

    bool operator==(const VoteMatrix&) const = default;

private:
    size_t n_ = 0;
    std::vector<int> v_;
};

// Per-tag temporal ordering: each of the three date fields votes (a -> b)
// when a's value is earlier or equal, and symmetrically for (b -> a).
VotePair vote_date(const TagBundle& a, const TagBundle& b);

// Exact equality of the four location tags votes both ways; full location on
// one side with any piece missing on the other votes toward the missing side.
VotePair vote_location(const TagBundle& a, const TagBundle& b);

// Same structure as location over Make / Model / Software.
VotePair vote_camera(const TagBundle& a, const TagBundle& b);

// One vote toward any image carrying an editing trace
// (ProcessingSoftware, Artist, HostComputer or ImageResources).
VotePair vote_editing(const TagBundle& a, const TagBundle& b);

// Byte-exact equal thumbnails vote both ways; thumbnail on one side only
// votes from the side that has one.
VotePair vote_thumbnail(const TagBundle& a, const TagBundle& b);

// Sums the enabled heuristics over every unordered pair. Throws TooFewImages
// for fewer than two bundles and ConfigError for an empty heuristic set.
VoteMatrix build_vote_matrix(const std::vector<TagBundle>& bundles, const HeuristicSet& enabled);

}  // namespace provgraph
