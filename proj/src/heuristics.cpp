#include "provgraph/heuristics.hpp"

#include "provgraph/common.hpp"

namespace provgraph {

HeuristicSet heuristic_set_from_names(const std::vector<std::string>& names) {
    HeuristicSet set = HeuristicSet::none();
    for (const auto& n : names) {
        if (n == "date") set.date = true;
        else if (n == "location") set.location = true;
        else if (n == "camera") set.camera = true;
        else if (n == "editing") set.editing = true;
        else if (n == "thumbnail") set.thumbnail = true;
        else throw ConfigError("unknown heuristic: " + n);
    }
    return set;
}

std::vector<std::string> heuristic_names(const HeuristicSet& s) {
    std::vector<std::string> out;
    if (s.date) out.push_back("date");
    if (s.location) out.push_back("location");
    if (s.camera) out.push_back("camera");
    if (s.editing) out.push_back("editing");
    if (s.thumbnail) out.push_back("thumbnail");
    return out;
}

VotePair vote_date(const TagBundle& a, const TagBundle& b) {
    VotePair v;
    auto compare = [&](const std::optional<DateTime>& da, const std::optional<DateTime>& db) {
        if (!da || !db) return;
        if (*da <= *db) ++v.ab;
        if (*db <= *da) ++v.ba;
    };
    compare(a.date_time_original, b.date_time_original);
    compare(a.modify_date, b.modify_date);
    compare(a.create_date, b.create_date);
    return v;
}

VotePair vote_location(const TagBundle& a, const TagBundle& b) {
    bool fa = a.has_full_location();
    bool fb = b.has_full_location();
    if (fa && fb) {
        bool equal = a.gps_latitude == b.gps_latitude &&
                     a.gps_latitude_ref == b.gps_latitude_ref &&
                     a.gps_longitude == b.gps_longitude &&
                     a.gps_longitude_ref == b.gps_longitude_ref;
        return equal ? VotePair{1, 1} : VotePair{0, 0};
    }
    if (fa) return {1, 0};
    if (fb) return {0, 1};
    return {0, 0};
}

VotePair vote_camera(const TagBundle& a, const TagBundle& b) {
    bool fa = a.has_full_camera();
    bool fb = b.has_full_camera();
    if (fa && fb) {
        bool equal = a.make == b.make && a.model == b.model && a.software == b.software;
        return equal ? VotePair{1, 1} : VotePair{0, 0};
    }
    if (fa) return {1, 0};
    if (fb) return {0, 1};
    return {0, 0};
}

VotePair vote_editing(const TagBundle& a, const TagBundle& b) {
    return {b.has_editing_trace() ? 1 : 0, a.has_editing_trace() ? 1 : 0};
}

VotePair vote_thumbnail(const TagBundle& a, const TagBundle& b) {
    bool ha = a.thumbnail.has_value();
    bool hb = b.thumbnail.has_value();
    if (ha && hb) return *a.thumbnail == *b.thumbnail ? VotePair{1, 1} : VotePair{0, 0};
    if (ha) return {1, 0};
    if (hb) return {0, 1};
    return {0, 0};
}

VoteMatrix build_vote_matrix(const std::vector<TagBundle>& bundles, const HeuristicSet& enabled) {
    if (bundles.size() < 2) throw TooFewImages("vote matrix needs at least two images");
    if (!enabled.any()) throw ConfigError("at least one heuristic must be enabled");

    const size_t n = bundles.size();
    VoteMatrix m(n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            VotePair total;
            auto accumulate = [&](const VotePair& v) {
                total.ab += v.ab;
                total.ba += v.ba;
            };
            if (enabled.date) accumulate(vote_date(bundles[i], bundles[j]));
            if (enabled.location) accumulate(vote_location(bundles[i], bundles[j]));
            if (enabled.camera) accumulate(vote_camera(bundles[i], bundles[j]));
            if (enabled.editing) accumulate(vote_editing(bundles[i], bundles[j]));
            if (enabled.thumbnail) accumulate(vote_thumbnail(bundles[i], bundles[j]));
            m.set(i, j, total.ab);
            m.set(j, i, total.ba);
        }
    }
    return m;
}

}  // namespace provgraph
