#include "provgraph/tags.hpp"

#include <charconv>
#include <cstdio>

namespace provgraph {

namespace {

bool parse_int(const char* s, int len, int& out) {
    auto [p, ec] = std::from_chars(s, s + len, out);
    return ec == std::errc() && p == s + len;
}

bool valid_civil(int year, int month, int day, int hour, int minute, int second) {
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12 || hour > 23 || minute > 59 || second > 59) return false;
    if (hour < 0 || minute < 0 || second < 0) return false;
    int dmax = mdays[month - 1];
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) dmax = 29;
    return day >= 1 && day <= dmax;
}

// Howard Hinnant's civil-days algorithm.
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::optional<DateTime> parse_exif_datetime(const std::string& text) {
    // YYYY:MM:DD hh:mm:ss
    if (text.size() != 19 || text[4] != ':' || text[7] != ':' || text[10] != ' ' ||
        text[13] != ':' || text[16] != ':')
        return std::nullopt;
    DateTime dt;
    if (!parse_int(text.data(), 4, dt.year) || !parse_int(text.data() + 5, 2, dt.month) ||
        !parse_int(text.data() + 8, 2, dt.day) || !parse_int(text.data() + 11, 2, dt.hour) ||
        !parse_int(text.data() + 14, 2, dt.minute) || !parse_int(text.data() + 17, 2, dt.second))
        return std::nullopt;
    if (!valid_civil(dt.year, dt.month, dt.day, dt.hour, dt.minute, dt.second))
        return std::nullopt;
    return dt;
}

std::string format_exif_datetime(const DateTime& dt) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%04d:%02d:%02d %02d:%02d:%02d", dt.year, dt.month, dt.day,
                  dt.hour, dt.minute, dt.second);
    return std::string(buf, 19);
}

std::optional<DateTime> parse_rfc3339(const std::string& text) {
    if (text.size() < 20) return std::nullopt;
    DateTime dt;
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't' && text[10] != ' '))
        return std::nullopt;
    if (text[13] != ':' || text[16] != ':') return std::nullopt;
    if (!parse_int(text.data(), 4, dt.year) || !parse_int(text.data() + 5, 2, dt.month) ||
        !parse_int(text.data() + 8, 2, dt.day) || !parse_int(text.data() + 11, 2, dt.hour) ||
        !parse_int(text.data() + 14, 2, dt.minute) || !parse_int(text.data() + 17, 2, dt.second))
        return std::nullopt;
    if (!valid_civil(dt.year, dt.month, dt.day, dt.hour, dt.minute, dt.second))
        return std::nullopt;
    size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {  // fractional seconds: ignored
        ++pos;
        size_t digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos, ++digits;
        if (digits == 0) return std::nullopt;
    }
    if (pos >= text.size()) return std::nullopt;
    char z = text[pos];
    if (z == 'Z' || z == 'z') {
        return pos + 1 == text.size() ? std::optional<DateTime>(dt) : std::nullopt;
    }
    if ((z == '+' || z == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
        int oh = 0, om = 0;
        if (!parse_int(text.data() + pos + 1, 2, oh) || !parse_int(text.data() + pos + 4, 2, om))
            return std::nullopt;
        int64_t offset = (static_cast<int64_t>(oh) * 60 + om) * 60;
        if (z == '+') offset = -offset;  // +02:00 means local = UTC + 2h
        return add_seconds(dt, offset);
    }
    return std::nullopt;
}

int64_t to_epoch_seconds(const DateTime& dt) {
    return days_from_civil(dt.year, dt.month, dt.day) * 86400 + dt.hour * 3600 + dt.minute * 60 +
           dt.second;
}

DateTime from_epoch_seconds(int64_t secs) {
    int64_t days = secs / 86400;
    int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    DateTime dt;
    civil_from_days(days, dt.year, dt.month, dt.day);
    dt.hour = static_cast<int>(rem / 3600);
    dt.minute = static_cast<int>((rem / 60) % 60);
    dt.second = static_cast<int>(rem % 60);
    return dt;
}

DateTime add_seconds(const DateTime& dt, int64_t delta) {
    return from_epoch_seconds(to_epoch_seconds(dt) + delta);
}

void demote_unpaired_gps(TagBundle& b) {
    if (b.gps_latitude.has_value() != b.gps_latitude_ref.has_value()) {
        b.gps_latitude.reset();
        b.gps_latitude_ref.reset();
    }
    if (b.gps_longitude.has_value() != b.gps_longitude_ref.has_value()) {
        b.gps_longitude.reset();
        b.gps_longitude_ref.reset();
    }
}

TagBundle merge_bundles(const TagBundle& primary, const TagBundle& fallback) {
    TagBundle out = primary;
    auto pick = [](auto& dst, const auto& src) {
        if (!dst) dst = src;
    };
    pick(out.date_time_original, fallback.date_time_original);
    pick(out.modify_date, fallback.modify_date);
    pick(out.create_date, fallback.create_date);
    pick(out.gps_latitude, fallback.gps_latitude);
    pick(out.gps_latitude_ref, fallback.gps_latitude_ref);
    pick(out.gps_longitude, fallback.gps_longitude);
    pick(out.gps_longitude_ref, fallback.gps_longitude_ref);
    pick(out.make, fallback.make);
    pick(out.model, fallback.model);
    pick(out.software, fallback.software);
    pick(out.processing_software, fallback.processing_software);
    pick(out.artist, fallback.artist);
    pick(out.host_computer, fallback.host_computer);
    pick(out.image_resources, fallback.image_resources);
    pick(out.thumbnail, fallback.thumbnail);
    out.source = primary.source;
    return out;
}

}  // namespace provgraph
