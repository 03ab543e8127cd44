#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "provgraph/common.hpp"
#include "provgraph/heuristics.hpp"

#include "helpers.hpp"

using namespace provgraph;
using namespace provgraph::testing;

namespace {

const DateTime kD0{2010, 1, 1, 10, 0, 0};
const DateTime kD1{2010, 1, 2, 10, 0, 0};
const DateTime kD2{2010, 1, 3, 10, 0, 0};

GpsTriple gps_a() { return {Rational{48, 1}, Rational{51, 1}, Rational{296, 10}}; }
GpsTriple gps_b() { return {Rational{2, 1}, Rational{17, 1}, Rational{402, 10}}; }

void set_location(TagBundle& b) {
    b.gps_latitude = gps_a();
    b.gps_latitude_ref = "N";
    b.gps_longitude = gps_b();
    b.gps_longitude_ref = "E";
}

// The crafted four-image case: original, cropped copy, spliced copy,
// stripped copy.
std::vector<TagBundle> golden_bundles() {
    TagBundle original;
    original.date_time_original = kD0;
    original.create_date = kD0;
    original.modify_date = kD0;
    set_location(original);
    original.make = "CanonX";
    original.model = "M1";
    original.software = "FW1";
    original.thumbnail = std::vector<uint8_t>{9, 9, 9};

    TagBundle cropped = original;
    cropped.modify_date = kD1;
    cropped.thumbnail = std::vector<uint8_t>{7, 7, 7};

    TagBundle spliced = original;
    spliced.modify_date = kD2;
    spliced.software = "GimpX";
    spliced.processing_software = "PS";
    spliced.artist = "bob";
    spliced.gps_latitude.reset();
    spliced.gps_latitude_ref.reset();
    spliced.gps_longitude.reset();
    spliced.gps_longitude_ref.reset();
    spliced.thumbnail.reset();

    TagBundle stripped;

    return {original, cropped, spliced, stripped};
}

VoteMatrix sum_single_heuristics(const std::vector<TagBundle>& bundles) {
    VoteMatrix total(bundles.size());
    for (HeuristicSet single : {HeuristicSet::only_date(), HeuristicSet::only_location(),
                                HeuristicSet::only_camera(), HeuristicSet::only_editing(),
                                HeuristicSet::only_thumbnail()}) {
        VoteMatrix part = build_vote_matrix(bundles, single);
        for (size_t i = 0; i < total.size(); ++i)
            for (size_t j = 0; j < total.size(); ++j) total.add(i, j, part.at(i, j));
    }
    return total;
}

}  // namespace

TEST_CASE("date rule examples") {
    TagBundle a, b;
    a.date_time_original = a.modify_date = a.create_date = DateTime{2010, 1, 1, 0, 0, 0};
    b.date_time_original = b.modify_date = b.create_date = DateTime{2012, 1, 1, 0, 0, 0};
    CHECK(vote_date(a, b) == VotePair{3, 0});
    CHECK(vote_date(a, a) == VotePair{3, 3});  // earlier-or-equal is reflexive

    TagBundle c, d;
    c.date_time_original = DateTime{2010, 1, 1, 0, 0, 0};
    d.modify_date = DateTime{2009, 1, 1, 0, 0, 0};
    CHECK(vote_date(c, d) == VotePair{0, 0});  // no field present on both sides
}

TEST_CASE("location rule examples") {
    TagBundle full_a, full_b, none;
    set_location(full_a);
    set_location(full_b);
    CHECK(vote_location(full_a, full_b) == VotePair{1, 1});
    CHECK(vote_location(full_a, none) == VotePair{1, 0});
    CHECK(vote_location(none, full_a) == VotePair{0, 1});
    CHECK(vote_location(none, none) == VotePair{0, 0});

    TagBundle differs = full_b;
    differs.gps_latitude = GpsTriple{Rational{48, 1}, Rational{51, 1}, Rational{2960, 100}};
    CHECK(vote_location(full_a, differs) == VotePair{0, 0});  // 296/10 != 2960/100 exactly
}

TEST_CASE("camera rule examples") {
    TagBundle a, b;
    a.make = b.make = "CanonX";
    a.model = b.model = "M1";
    a.software = b.software = "FW1";
    CHECK(vote_camera(a, b) == VotePair{1, 1});

    TagBundle make_only;
    make_only.make = "CanonX";
    CHECK(vote_camera(a, make_only) == VotePair{1, 0});

    TagBundle other_software = b;
    other_software.software = "FW2";
    CHECK(vote_camera(a, other_software) == VotePair{0, 0});  // all three must agree
}

TEST_CASE("editing rule examples") {
    TagBundle plain, artist, processed;
    artist.artist = "bob";
    processed.processing_software = "PS";
    CHECK(vote_editing(plain, artist) == VotePair{1, 0});
    CHECK(vote_editing(artist, plain) == VotePair{0, 1});
    CHECK(vote_editing(processed, processed) == VotePair{1, 1});  // fires per direction
    CHECK(vote_editing(plain, plain) == VotePair{0, 0});
}

TEST_CASE("thumbnail rule examples") {
    TagBundle a, b, none;
    a.thumbnail = std::vector<uint8_t>{1, 2, 3};
    b.thumbnail = std::vector<uint8_t>{1, 2, 3};
    CHECK(vote_thumbnail(a, b) == VotePair{1, 1});
    CHECK(vote_thumbnail(a, none) == VotePair{1, 0});
    (*b.thumbnail)[1] ^= 0x80;
    CHECK(vote_thumbnail(a, b) == VotePair{0, 0});  // one byte off
}

TEST_CASE("exhaustive date truth table") {
    // per-field states: 0 both absent, 1 a only, 2 b only, 3 a<b, 4 a=b, 5 a>b
    for (int s0 = 0; s0 < 6; ++s0)
        for (int s1 = 0; s1 < 6; ++s1)
            for (int s2 = 0; s2 < 6; ++s2) {
                int states[3] = {s0, s1, s2};
                TagBundle a, b;
                std::optional<DateTime>* fa[3] = {&a.date_time_original, &a.modify_date,
                                                  &a.create_date};
                std::optional<DateTime>* fb[3] = {&b.date_time_original, &b.modify_date,
                                                  &b.create_date};
                VotePair expect;
                for (int f = 0; f < 3; ++f) {
                    switch (states[f]) {
                        case 0: break;
                        case 1: *fa[f] = kD0; break;
                        case 2: *fb[f] = kD0; break;
                        case 3:
                            *fa[f] = kD0;
                            *fb[f] = kD1;
                            expect.ab += 1;
                            break;
                        case 4:
                            *fa[f] = kD1;
                            *fb[f] = kD1;
                            expect.ab += 1;
                            expect.ba += 1;
                            break;
                        case 5:
                            *fa[f] = kD1;
                            *fb[f] = kD0;
                            expect.ba += 1;
                            break;
                    }
                }
                CHECK(vote_date(a, b) == expect);
            }
}

TEST_CASE("exhaustive location truth table") {
    for (int pa = 0; pa < 16; ++pa)
        for (int pb = 0; pb < 16; ++pb)
            for (int equal = 0; equal < 2; ++equal) {
                TagBundle a, b;
                if (pa & 1) a.gps_latitude = gps_a();
                if (pa & 2) a.gps_latitude_ref = "N";
                if (pa & 4) a.gps_longitude = gps_b();
                if (pa & 8) a.gps_longitude_ref = "E";
                if (pb & 1) b.gps_latitude = equal ? gps_a() : gps_b();
                if (pb & 2) b.gps_latitude_ref = "N";
                if (pb & 4) b.gps_longitude = gps_b();
                if (pb & 8) b.gps_longitude_ref = "E";

                bool full_a = pa == 15;
                bool full_b = pb == 15;
                VotePair expect{0, 0};
                if (full_a && full_b) {
                    if (equal) expect = {1, 1};
                } else if (full_a) {
                    expect = {1, 0};
                } else if (full_b) {
                    expect = {0, 1};
                }
                CHECK(vote_location(a, b) == expect);
            }
}

TEST_CASE("exhaustive camera truth table") {
    for (int pa = 0; pa < 8; ++pa)
        for (int pb = 0; pb < 8; ++pb)
            for (int equal = 0; equal < 2; ++equal) {
                TagBundle a, b;
                if (pa & 1) a.make = "CanonX";
                if (pa & 2) a.model = "M1";
                if (pa & 4) a.software = "FW1";
                if (pb & 1) b.make = "CanonX";
                if (pb & 2) b.model = "M1";
                if (pb & 4) b.software = equal ? "FW1" : "FW2";

                bool full_a = pa == 7;
                bool full_b = pb == 7;
                VotePair expect{0, 0};
                if (full_a && full_b) {
                    if (equal) expect = {1, 1};
                } else if (full_a) {
                    expect = {1, 0};
                } else if (full_b) {
                    expect = {0, 1};
                }
                CHECK(vote_camera(a, b) == expect);
            }
}

TEST_CASE("exhaustive editing truth table") {
    for (int pa = 0; pa < 16; ++pa)
        for (int pb = 0; pb < 16; ++pb) {
            TagBundle a, b;
            if (pa & 1) a.processing_software = "x";
            if (pa & 2) a.artist = "x";
            if (pa & 4) a.host_computer = "x";
            if (pa & 8) a.image_resources = std::vector<uint8_t>{1};
            if (pb & 1) b.processing_software = "y";
            if (pb & 2) b.artist = "y";
            if (pb & 4) b.host_computer = "y";
            if (pb & 8) b.image_resources = std::vector<uint8_t>{2};
            VotePair expect{pb != 0 ? 1 : 0, pa != 0 ? 1 : 0};
            CHECK(vote_editing(a, b) == expect);
        }
}

TEST_CASE("exhaustive thumbnail truth table") {
    for (int pa = 0; pa < 2; ++pa)
        for (int pb = 0; pb < 2; ++pb)
            for (int equal = 0; equal < 2; ++equal) {
                TagBundle a, b;
                if (pa) a.thumbnail = std::vector<uint8_t>{1, 2};
                if (pb) b.thumbnail = equal ? std::vector<uint8_t>{1, 2}
                                            : std::vector<uint8_t>{1, 3};
                VotePair expect{0, 0};
                if (pa && pb) {
                    if (equal) expect = {1, 1};
                } else if (pa) {
                    expect = {1, 0};
                } else if (pb) {
                    expect = {0, 1};
                }
                CHECK(vote_thumbnail(a, b) == expect);
            }
}

TEST_CASE("golden four-image vote matrix") {
    auto bundles = golden_bundles();
    VoteMatrix m = build_vote_matrix(bundles, HeuristicSet::all());
    const int expect[4][4] = {
        {0, 5, 6, 3},
        {4, 0, 6, 3},
        {2, 2, 0, 1},
        {0, 0, 1, 0},
    };
    for (size_t i = 0; i < 4; ++i)
        for (size_t j = 0; j < 4; ++j) CHECK(m.at(i, j) == expect[i][j]);

    // decomposition: all heuristics equals the entrywise single-heuristic sum
    CHECK(m == sum_single_heuristics(bundles));
}

TEST_CASE("date-only chain is upper triangular") {
    std::vector<TagBundle> chain(3);
    for (int i = 0; i < 3; ++i) {
        DateTime t{2010, 1, 1 + i, 0, 0, 0};
        chain[i].date_time_original = t;
        chain[i].modify_date = t;
        chain[i].create_date = t;
    }
    VoteMatrix m = build_vote_matrix(chain, HeuristicSet::only_date());
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 3; ++j) CHECK(m.at(i, j) == ((i < j) ? 3 : 0));
}

TEST_CASE("two all-absent bundles give the zero matrix") {
    VoteMatrix m = build_vote_matrix(std::vector<TagBundle>(2), HeuristicSet::all());
    CHECK(m.at(0, 1) == 0);
    CHECK(m.at(1, 0) == 0);
}

TEST_CASE("build_vote_matrix preconditions") {
    CHECK_THROWS_AS(build_vote_matrix(std::vector<TagBundle>(1), HeuristicSet::all()),
                    TooFewImages);
    CHECK_THROWS_AS(build_vote_matrix(std::vector<TagBundle>(2), HeuristicSet::none()),
                    ConfigError);
}

TEST_CASE("monotonicity, bounds, decomposition and equivariance") {
    Rng rng(42);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<TagBundle> bundles;
        size_t n = 2 + rng.below(5);
        for (size_t i = 0; i < n; ++i) bundles.push_back(random_bundle(rng));

        VoteMatrix all = build_vote_matrix(bundles, HeuristicSet::all());
        CHECK(all == sum_single_heuristics(bundles));

        // adding a heuristic never decreases an entry
        HeuristicSet subset = HeuristicSet::only_date();
        subset.location = rng.below(2) != 0;
        subset.camera = rng.below(2) != 0;
        VoteMatrix partial = build_vote_matrix(bundles, subset);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                CHECK(partial.at(i, j) <= all.at(i, j));
                CHECK(all.at(i, j) <= 7);  // 3 date + 1 per remaining rule per direction
                if (i == j) CHECK(all.at(i, j) == 0);
            }

        // permuting inputs permutes rows and columns identically
        std::vector<size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0u);
        for (size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        std::vector<TagBundle> shuffled(n);
        for (size_t i = 0; i < n; ++i) shuffled[i] = bundles[perm[i]];
        VoteMatrix pm = build_vote_matrix(shuffled, HeuristicSet::all());
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) CHECK(pm.at(i, j) == all.at(perm[i], perm[j]));
    }
}

TEST_CASE("symmetric rules give symmetric matrices on identical bundles") {
    Rng rng(77);
    TagBundle proto = random_bundle(rng, 1.0);
    std::vector<TagBundle> same(4, proto);
    for (HeuristicSet set : {HeuristicSet::only_location(), HeuristicSet::only_camera(),
                             HeuristicSet::only_thumbnail()}) {
        VoteMatrix m = build_vote_matrix(same, set);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 4; ++j) CHECK(m.at(i, j) == m.at(j, i));
    }
}
