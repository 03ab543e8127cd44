#include "provgraph/exif_write.hpp"

#include <algorithm>

#include "provgraph/exif.hpp"

namespace provgraph {

namespace {

constexpr uint16_t kTypeByte = 1;
constexpr uint16_t kTypeAscii = 2;
constexpr uint16_t kTypeLong = 4;
constexpr uint16_t kTypeRational = 5;
constexpr uint16_t kTypeUndefined = 7;

struct WEntry {
    uint16_t tag;
    uint16_t type;
    uint32_t count;
    std::vector<uint8_t> value;   // raw value bytes, count * unit long
    size_t data_offset = 0;       // assigned when value.size() > 4
};

void push_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void push_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
}

std::vector<uint8_t> ascii_value(const std::string& s) {
    std::vector<uint8_t> v(s.begin(), s.end());
    v.push_back(0);
    return v;
}

std::vector<uint8_t> long_value(uint32_t x) {
    std::vector<uint8_t> v;
    push_u32(v, x);
    return v;
}

std::vector<uint8_t> rational_triple_value(const GpsTriple& t) {
    std::vector<uint8_t> v;
    for (const auto& r : t) {
        push_u32(v, r.num);
        push_u32(v, r.den);
    }
    return v;
}

void add_ascii(std::vector<WEntry>& ifd, uint16_t tag, const std::optional<std::string>& s) {
    if (!s) return;
    auto v = ascii_value(*s);
    ifd.push_back({tag, kTypeAscii, static_cast<uint32_t>(v.size()), std::move(v)});
}

void add_datetime(std::vector<WEntry>& ifd, uint16_t tag, const std::optional<DateTime>& dt) {
    if (!dt) return;
    add_ascii(ifd, tag, format_exif_datetime(*dt));
}

size_t ifd_byte_size(const std::vector<WEntry>& ifd) {
    return 2 + ifd.size() * 12 + 4;
}

void serialize_ifd(std::vector<uint8_t>& out, const std::vector<WEntry>& ifd, uint32_t next_ifd) {
    push_u16(out, static_cast<uint16_t>(ifd.size()));
    for (const auto& e : ifd) {
        push_u16(out, e.tag);
        push_u16(out, e.type);
        push_u32(out, e.count);
        if (e.value.size() <= 4) {
            size_t start = out.size();
            out.insert(out.end(), e.value.begin(), e.value.end());
            out.resize(start + 4, 0);
        } else {
            push_u32(out, static_cast<uint32_t>(e.data_offset));
        }
    }
    push_u32(out, next_ifd);
}

void append_data(std::vector<uint8_t>& out, const std::vector<WEntry>& ifd) {
    for (const auto& e : ifd) {
        if (e.value.size() > 4) out.insert(out.end(), e.value.begin(), e.value.end());
    }
}

std::vector<uint8_t> build_tiff(const TagBundle& b, const Raster& base) {
    std::vector<WEntry> ifd0, exif, gps, ifd1;

    add_ascii(ifd0, exif_tag::ProcessingSoftware, b.processing_software);
    if (!base.empty()) {
        ifd0.push_back({exif_tag::ImageWidth, kTypeLong, 1,
                        long_value(static_cast<uint32_t>(base.width))});
        ifd0.push_back({exif_tag::ImageLength, kTypeLong, 1,
                        long_value(static_cast<uint32_t>(base.height))});
    }
    add_ascii(ifd0, exif_tag::Make, b.make);
    add_ascii(ifd0, exif_tag::Model, b.model);
    add_ascii(ifd0, exif_tag::Software, b.software);
    add_datetime(ifd0, exif_tag::ModifyDate, b.modify_date);
    add_ascii(ifd0, exif_tag::Artist, b.artist);
    add_ascii(ifd0, exif_tag::HostComputer, b.host_computer);
    if (b.image_resources) {
        ifd0.push_back({exif_tag::ImageResources, kTypeUndefined,
                        static_cast<uint32_t>(b.image_resources->size()), *b.image_resources});
    }

    add_datetime(exif, exif_tag::DateTimeOriginal, b.date_time_original);
    add_datetime(exif, exif_tag::CreateDate, b.create_date);

    if (b.gps_latitude && b.gps_latitude_ref) {
        add_ascii(gps, exif_tag::GpsLatitudeRef, b.gps_latitude_ref);
        gps.push_back({exif_tag::GpsLatitude, kTypeRational, 3,
                       rational_triple_value(*b.gps_latitude)});
    }
    if (b.gps_longitude && b.gps_longitude_ref) {
        add_ascii(gps, exif_tag::GpsLongitudeRef, b.gps_longitude_ref);
        gps.push_back({exif_tag::GpsLongitude, kTypeRational, 3,
                       rational_triple_value(*b.gps_longitude)});
    }

    // Pointer entries get their values once the layout is known.
    if (!exif.empty()) ifd0.push_back({exif_tag::ExifIfdPointer, kTypeLong, 1, long_value(0)});
    if (!gps.empty()) ifd0.push_back({exif_tag::GpsIfdPointer, kTypeLong, 1, long_value(0)});
    if (b.thumbnail) {
        ifd1.push_back({exif_tag::ThumbOffset, kTypeLong, 1, long_value(0)});
        ifd1.push_back({exif_tag::ThumbLength, kTypeLong, 1,
                        long_value(static_cast<uint32_t>(b.thumbnail->size()))});
    }

    auto by_tag = [](const WEntry& a, const WEntry& c) { return a.tag < c.tag; };
    std::sort(ifd0.begin(), ifd0.end(), by_tag);
    std::sort(exif.begin(), exif.end(), by_tag);
    std::sort(gps.begin(), gps.end(), by_tag);

    // Layout: header | IFD0 | Exif IFD | GPS IFD | IFD1 | value data | thumbnail.
    size_t off_ifd0 = 8;
    size_t off_exif = off_ifd0 + ifd_byte_size(ifd0);
    size_t off_gps = off_exif + (exif.empty() ? 0 : ifd_byte_size(exif));
    size_t off_ifd1 = off_gps + (gps.empty() ? 0 : ifd_byte_size(gps));
    size_t off_data = off_ifd1 + (ifd1.empty() ? 0 : ifd_byte_size(ifd1));

    size_t cursor = off_data;
    for (auto* ifd : {&ifd0, &exif, &gps, &ifd1}) {
        for (auto& e : *ifd) {
            if (e.value.size() > 4) {
                e.data_offset = cursor;
                cursor += e.value.size();
            }
        }
    }
    size_t off_thumb = cursor;

    for (auto& e : ifd0) {
        if (e.tag == exif_tag::ExifIfdPointer) e.value = long_value(static_cast<uint32_t>(off_exif));
        if (e.tag == exif_tag::GpsIfdPointer) e.value = long_value(static_cast<uint32_t>(off_gps));
    }
    for (auto& e : ifd1) {
        if (e.tag == exif_tag::ThumbOffset) e.value = long_value(static_cast<uint32_t>(off_thumb));
    }

    std::vector<uint8_t> out;
    out.reserve(off_thumb + (b.thumbnail ? b.thumbnail->size() : 0));
    out.push_back('I');
    out.push_back('I');
    push_u16(out, 42);
    push_u32(out, static_cast<uint32_t>(off_ifd0));
    serialize_ifd(out, ifd0, ifd1.empty() ? 0 : static_cast<uint32_t>(off_ifd1));
    if (!exif.empty()) serialize_ifd(out, exif, 0);
    if (!gps.empty()) serialize_ifd(out, gps, 0);
    if (!ifd1.empty()) serialize_ifd(out, ifd1, 0);
    append_data(out, ifd0);
    append_data(out, exif);
    append_data(out, gps);
    append_data(out, ifd1);
    if (b.thumbnail) out.insert(out.end(), b.thumbnail->begin(), b.thumbnail->end());
    return out;
}

}  // namespace

std::vector<uint8_t> write_exif(const TagBundle& bundle, const Raster& base_image) {
    std::vector<uint8_t> tiff = build_tiff(bundle, base_image);

    // APP1 payload is "Exif\0\0" + TIFF and must fit a 16-bit segment length.
    if (tiff.size() + 8 > 0xFFFF) return tiff;

    std::vector<uint8_t> out;
    out.reserve(tiff.size() + 12);
    out.push_back(0xFF);
    out.push_back(0xD8);  // SOI
    out.push_back(0xFF);
    out.push_back(0xE1);  // APP1
    uint16_t seg_len = static_cast<uint16_t>(tiff.size() + 8);
    out.push_back(static_cast<uint8_t>(seg_len >> 8));
    out.push_back(static_cast<uint8_t>(seg_len & 0xFF));
    const char* label = "Exif\0\0";
    out.insert(out.end(), label, label + 6);
    out.insert(out.end(), tiff.begin(), tiff.end());
    out.push_back(0xFF);
    out.push_back(0xD9);  // EOI
    return out;
}

}  // namespace provgraph
