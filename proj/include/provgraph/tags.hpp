#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace provgraph {

// Exact unsigned rational, compared as raw numerator/denominator pairs
// (no reduction, no floating point).
struct Rational {
    uint32_t num = 0;
    uint32_t den = 1;
    bool operator==(const Rational&) const = default;
};

// Degrees / minutes / seconds.
using GpsTriple = std::array<Rational, 3>;

// Zone-less calendar timestamp at second resolution, ordered field-wise.
struct DateTime {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    int second = 0;

    auto operator<=>(const DateTime&) const = default;
};

// "YYYY:MM:DD hh:mm:ss" (EXIF layout). Parse rejects anything else.
std::optional<DateTime> parse_exif_datetime(const std::string& text);
std::string format_exif_datetime(const DateTime& dt);

// RFC 3339 "YYYY-MM-DDThh:mm:ss[.frac](Z|±hh:mm)", normalized to UTC.
std::optional<DateTime> parse_rfc3339(const std::string& text);

// Civil <-> linear time helpers (for offsets and random deltas).
int64_t to_epoch_seconds(const DateTime& dt);
DateTime from_epoch_seconds(int64_t secs);
DateTime add_seconds(const DateTime& dt, int64_t delta);

enum class TagSource { embedded, sidecar, harvested };

// The canonical per-image metadata record. Every field is either absent or
// fully parsed. GPS values and their refs come in pairs: an unpaired half is
// demoted to absent at construction time (see demote_unpaired_gps).
struct TagBundle {
    std::optional<DateTime> date_time_original;
    std::optional<DateTime> modify_date;
    std::optional<DateTime> create_date;
    std::optional<GpsTriple> gps_latitude;
    std::optional<std::string> gps_latitude_ref;   // "N" | "S"
    std::optional<GpsTriple> gps_longitude;
    std::optional<std::string> gps_longitude_ref;  // "E" | "W"
    std::optional<std::string> make;
    std::optional<std::string> model;
    std::optional<std::string> software;
    std::optional<std::string> processing_software;
    std::optional<std::string> artist;
    std::optional<std::string> host_computer;
    std::optional<std::vector<uint8_t>> image_resources;
    std::optional<std::vector<uint8_t>> thumbnail;
    TagSource source = TagSource::embedded;

    bool operator==(const TagBundle&) const = default;

    bool has_full_location() const {
        return gps_latitude && gps_latitude_ref && gps_longitude && gps_longitude_ref;
    }
    bool has_full_camera() const { return make && model && software; }
    bool has_editing_trace() const {
        return processing_software || artist || host_computer || image_resources;
    }
};

void demote_unpaired_gps(TagBundle& bundle);

// Field-wise overlay: primary's value wins when present, fallback fills gaps.
// The result keeps primary's source.
TagBundle merge_bundles(const TagBundle& primary, const TagBundle& fallback);

struct PostRecord {
    std::string post_id;
    std::string author;
    DateTime submitted_at;
    std::string image_ref;
    std::optional<std::string> parent_post_id;
};

}  // namespace provgraph
