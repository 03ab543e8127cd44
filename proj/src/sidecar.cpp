#include "provgraph/sidecar.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "provgraph/common.hpp"

namespace provgraph {

namespace {

using nlohmann::json;

DateTime get_date(const json& v, const std::string& key) {
    if (!v.is_string()) throw SchemaError(key + " must be a string");
    auto dt = parse_exif_datetime(v.get<std::string>());
    if (!dt) throw SchemaError(key + " is not a YYYY:MM:DD hh:mm:ss date");
    return *dt;
}

std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw SchemaError(key + " must be a string");
    return v.get<std::string>();
}

Rational number_to_rational(const json& v, const std::string& key) {
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<int64_t>() >= 0)) {
        return Rational{static_cast<uint32_t>(v.get<uint64_t>()), 1};
    }
    if (v.is_number_float()) {
        double x = v.get<double>();
        if (x < 0) throw SchemaError(key + " components must be non-negative");
        uint32_t den = 1;
        for (int i = 0; i < 7; ++i) {
            double scaled = x * den;
            if (std::fabs(scaled - std::round(scaled)) < 1e-9 * std::max(1.0, std::fabs(scaled)))
                return Rational{static_cast<uint32_t>(std::llround(scaled)), den};
            den *= 10;
        }
        throw SchemaError(key + " component is not representable as a rational");
    }
    throw SchemaError(key + " component must be a number or [num, den] pair");
}

GpsTriple get_gps_triple(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3) throw SchemaError(key + " must be a 3-element array");
    GpsTriple t;
    for (size_t i = 0; i < 3; ++i) {
        const json& e = v[i];
        if (e.is_array()) {
            if (e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
                e[0].get<int64_t>() < 0 || e[1].get<int64_t>() < 0)
                throw SchemaError(key + " pair must be two non-negative integers");
            t[i] = Rational{static_cast<uint32_t>(e[0].get<uint64_t>()),
                            static_cast<uint32_t>(e[1].get<uint64_t>())};
        } else {
            t[i] = number_to_rational(e, key);
        }
    }
    return t;
}

std::vector<uint8_t> get_hex_bytes(const json& v, const std::string& key) {
    std::string s = get_string(v, key);
    if (s.size() % 2 != 0) throw SchemaError(key + " hex string must have even length");
    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw SchemaError(key + " is not a hex string");
    };
    std::vector<uint8_t> out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<uint8_t>(nibble(s[2 * i]) * 16 + nibble(s[2 * i + 1]));
    return out;
}

std::string get_ref(const json& v, const std::string& key, char a, char b) {
    std::string s = get_string(v, key);
    if (s.size() != 1 || (s[0] != a && s[0] != b))
        throw SchemaError(key + " must be \"" + a + "\" or \"" + b + "\"");
    return s;
}

}  // namespace

TagBundle load_sidecar(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("unparseable sidecar document: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("sidecar document must be a JSON object");

    TagBundle b;
    b.source = TagSource::sidecar;
    for (const auto& [key, value] : doc.items()) {
        if (key == "DateTimeOriginal") b.date_time_original = get_date(value, key);
        else if (key == "ModifyDate") b.modify_date = get_date(value, key);
        else if (key == "CreateDate") b.create_date = get_date(value, key);
        else if (key == "GPSLatitude") b.gps_latitude = get_gps_triple(value, key);
        else if (key == "GPSLatitudeRef") b.gps_latitude_ref = get_ref(value, key, 'N', 'S');
        else if (key == "GPSLongitude") b.gps_longitude = get_gps_triple(value, key);
        else if (key == "GPSLongitudeRef") b.gps_longitude_ref = get_ref(value, key, 'E', 'W');
        else if (key == "Make") b.make = get_string(value, key);
        else if (key == "Model") b.model = get_string(value, key);
        else if (key == "Software") b.software = get_string(value, key);
        else if (key == "ProcessingSoftware") b.processing_software = get_string(value, key);
        else if (key == "Artist") b.artist = get_string(value, key);
        else if (key == "HostComputer") b.host_computer = get_string(value, key);
        else if (key == "ImageResources") b.image_resources = get_hex_bytes(value, key);
        else if (key == "Thumbnail") b.thumbnail = get_hex_bytes(value, key);
        // unknown keys ignored
    }
    demote_unpaired_gps(b);
    return b;
}

std::vector<PostRecord> load_post_records(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("unparseable post-record document: ") + e.what());
    }
    if (!doc.is_array()) throw SchemaError("post records must be a JSON array");

    std::vector<PostRecord> out;
    out.reserve(doc.size());
    for (const auto& item : doc) {
        if (!item.is_object()) throw SchemaError("post record must be an object");
        PostRecord r;
        r.post_id = get_string(item.at("post_id"), "post_id");
        r.author = get_string(item.at("author"), "author");
        auto ts = parse_rfc3339(get_string(item.at("submitted_at"), "submitted_at"));
        if (!ts) throw SchemaError("submitted_at is not an RFC 3339 timestamp");
        r.submitted_at = *ts;
        r.image_ref = get_string(item.at("image_ref"), "image_ref");
        if (item.contains("parent_post_id") && !item["parent_post_id"].is_null())
            r.parent_post_id = get_string(item["parent_post_id"], "parent_post_id");
        out.push_back(std::move(r));
    }
    return out;
}

std::map<std::string, TagBundle> harvest_posts(const std::vector<PostRecord>& records) {
    if (records.empty()) throw EmptyCollection("harvest_posts requires at least one record");

    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.post_id);
    for (const auto& r : records) {
        if (r.parent_post_id && !ids.count(*r.parent_post_id))
            throw DanglingParent("parent_post_id " + *r.parent_post_id + " not in collection");
    }

    std::map<std::string, TagBundle> out;
    for (const auto& r : records) {
        auto it = out.find(r.image_ref);
        if (it == out.end()) {
            TagBundle b;
            b.source = TagSource::harvested;
            b.date_time_original = r.submitted_at;
            out.emplace(r.image_ref, std::move(b));
        } else if (r.submitted_at < *it->second.date_time_original) {
            it->second.date_time_original = r.submitted_at;  // keep earliest sighting
        }
    }
    return out;
}

}  // namespace provgraph
