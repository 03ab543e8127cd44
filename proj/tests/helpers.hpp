#pragma once

#include <string>
#include <vector>

#include "provgraph/common.hpp"
#include "provgraph/tags.hpp"

namespace provgraph::testing {

inline DateTime random_datetime(Rng& rng) {
    DateTime dt;
    dt.year = 1990 + static_cast<int>(rng.below(40));
    dt.month = 1 + static_cast<int>(rng.below(12));
    dt.day = 1 + static_cast<int>(rng.below(28));
    dt.hour = static_cast<int>(rng.below(24));
    dt.minute = static_cast<int>(rng.below(60));
    dt.second = static_cast<int>(rng.below(60));
    return dt;
}

inline std::string random_text(Rng& rng, size_t max_len = 12) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 ._-";
    size_t len = 1 + rng.below(max_len);
    std::string s;
    for (size_t i = 0; i < len; ++i) s.push_back(alphabet[rng.below(sizeof(alphabet) - 1)]);
    return s;
}

inline std::vector<uint8_t> random_bytes(Rng& rng, size_t max_len = 64) {
    size_t len = 1 + rng.below(max_len);
    std::vector<uint8_t> v(len);
    for (auto& b : v) b = static_cast<uint8_t>(rng.below(256));
    return v;
}

inline GpsTriple random_gps_triple(Rng& rng) {
    return GpsTriple{Rational{static_cast<uint32_t>(rng.below(180)), 1},
                     Rational{static_cast<uint32_t>(rng.below(60)), 1},
                     Rational{static_cast<uint32_t>(rng.below(600000)), 10000}};
}

// Random bundle with independently present fields (GPS halves kept paired).
inline TagBundle random_bundle(Rng& rng, double presence = 0.6) {
    TagBundle b;
    b.source = TagSource::embedded;
    auto on = [&] { return rng.unit() < presence; };
    if (on()) b.date_time_original = random_datetime(rng);
    if (on()) b.modify_date = random_datetime(rng);
    if (on()) b.create_date = random_datetime(rng);
    if (on()) {
        b.gps_latitude = random_gps_triple(rng);
        b.gps_latitude_ref = rng.below(2) ? "N" : "S";
    }
    if (on()) {
        b.gps_longitude = random_gps_triple(rng);
        b.gps_longitude_ref = rng.below(2) ? "E" : "W";
    }
    if (on()) b.make = random_text(rng);
    if (on()) b.model = random_text(rng);
    if (on()) b.software = random_text(rng);
    if (on()) b.processing_software = random_text(rng);
    if (on()) b.artist = random_text(rng);
    if (on()) b.host_computer = random_text(rng);
    if (on()) b.image_resources = random_bytes(rng);
    if (on()) b.thumbnail = random_bytes(rng, 256);
    return b;
}

}  // namespace provgraph::testing
