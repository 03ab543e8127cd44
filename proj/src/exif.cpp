#include "provgraph/exif.hpp"

#include <cstring>

#include "provgraph/common.hpp"

namespace provgraph {

namespace {

// TIFF value types we care about.
constexpr uint16_t kTypeByte = 1;
constexpr uint16_t kTypeAscii = 2;
constexpr uint16_t kTypeShort = 3;
constexpr uint16_t kTypeLong = 4;
constexpr uint16_t kTypeRational = 5;
constexpr uint16_t kTypeUndefined = 7;

size_t type_size(uint16_t type) {
    switch (type) {
        case kTypeByte:
        case kTypeAscii:
        case kTypeUndefined: return 1;
        case kTypeShort: return 2;
        case kTypeLong: return 4;
        case kTypeRational: return 8;
        default: return 0;
    }
}

class TiffReader {
public:
    TiffReader(const uint8_t* data, size_t size, bool little_endian)
        : data_(data), size_(size), le_(little_endian) {}

    bool read_u16(size_t off, uint16_t& out) const {
        if (off + 2 > size_) return false;
        out = le_ ? static_cast<uint16_t>(data_[off] | (data_[off + 1] << 8))
                  : static_cast<uint16_t>((data_[off] << 8) | data_[off + 1]);
        return true;
    }

    bool read_u32(size_t off, uint32_t& out) const {
        if (off + 4 > size_) return false;
        if (le_) {
            out = static_cast<uint32_t>(data_[off]) | (static_cast<uint32_t>(data_[off + 1]) << 8) |
                  (static_cast<uint32_t>(data_[off + 2]) << 16) |
                  (static_cast<uint32_t>(data_[off + 3]) << 24);
        } else {
            out = (static_cast<uint32_t>(data_[off]) << 24) |
                  (static_cast<uint32_t>(data_[off + 1]) << 16) |
                  (static_cast<uint32_t>(data_[off + 2]) << 8) |
                  static_cast<uint32_t>(data_[off + 3]);
        }
        return true;
    }

    bool read_bytes(size_t off, size_t len, std::vector<uint8_t>& out) const {
        if (len > size_ || off > size_ - len) return false;
        out.assign(data_ + off, data_ + off + len);
        return true;
    }

    size_t size() const { return size_; }

private:
    const uint8_t* data_;
    size_t size_;
    bool le_;
};

struct Entry {
    uint16_t tag = 0;
    uint16_t type = 0;
    uint32_t count = 0;
    size_t value_offset = 0;  // absolute offset of the value bytes
    size_t byte_len = 0;
};

// Decodes one 12-byte IFD entry. Returns false when the entry is malformed
// (unknown type, size overflow, value out of bounds); such entries are skipped.
bool decode_entry(const TiffReader& r, size_t entry_off, Entry& e) {
    uint32_t count = 0;
    if (!r.read_u16(entry_off, e.tag) || !r.read_u16(entry_off + 2, e.type) ||
        !r.read_u32(entry_off + 4, count))
        return false;
    size_t unit = type_size(e.type);
    if (unit == 0) return false;
    uint64_t len = static_cast<uint64_t>(count) * unit;
    if (len > r.size()) return false;
    e.count = count;
    e.byte_len = static_cast<size_t>(len);
    if (len <= 4) {
        e.value_offset = entry_off + 8;
    } else {
        uint32_t off = 0;
        if (!r.read_u32(entry_off + 8, off)) return false;
        e.value_offset = off;
    }
    return e.byte_len == 0 || (e.value_offset <= r.size() && e.byte_len <= r.size() - e.value_offset);
}

std::optional<std::string> read_ascii(const TiffReader& r, const Entry& e) {
    if (e.type != kTypeAscii || e.count == 0) return std::nullopt;
    std::vector<uint8_t> raw;
    if (!r.read_bytes(e.value_offset, e.byte_len, raw)) return std::nullopt;
    size_t len = raw.size();
    while (len > 0 && raw[len - 1] == 0) --len;  // strip NUL terminator(s)
    return std::string(raw.begin(), raw.begin() + len);
}

std::optional<DateTime> read_datetime(const TiffReader& r, const Entry& e) {
    auto s = read_ascii(r, e);
    if (!s) return std::nullopt;
    return parse_exif_datetime(*s);
}

std::optional<GpsTriple> read_gps_triple(const TiffReader& r, const Entry& e) {
    if (e.type != kTypeRational || e.count != 3) return std::nullopt;
    GpsTriple t;
    for (int i = 0; i < 3; ++i) {
        uint32_t num = 0, den = 0;
        if (!r.read_u32(e.value_offset + i * 8, num) || !r.read_u32(e.value_offset + i * 8 + 4, den))
            return std::nullopt;
        t[static_cast<size_t>(i)] = Rational{num, den};
    }
    return t;
}

std::optional<std::string> read_gps_ref(const TiffReader& r, const Entry& e, char a, char b) {
    auto s = read_ascii(r, e);
    if (!s || s->size() != 1) return std::nullopt;
    if ((*s)[0] != a && (*s)[0] != b) return std::nullopt;
    return s;
}

std::optional<std::vector<uint8_t>> read_blob(const TiffReader& r, const Entry& e) {
    if ((e.type != kTypeUndefined && e.type != kTypeByte) || e.count == 0) return std::nullopt;
    std::vector<uint8_t> raw;
    if (!r.read_bytes(e.value_offset, e.byte_len, raw)) return std::nullopt;
    return raw;
}

std::optional<uint32_t> read_unsigned(const TiffReader& r, const Entry& e) {
    if (e.count != 1) return std::nullopt;
    if (e.type == kTypeShort) {
        uint16_t v = 0;
        if (!r.read_u16(e.value_offset, v)) return std::nullopt;
        return v;
    }
    if (e.type == kTypeLong) {
        uint32_t v = 0;
        if (!r.read_u32(e.value_offset, v)) return std::nullopt;
        return v;
    }
    return std::nullopt;
}

// Walks one IFD, dispatching entries to the visitor. Returns the offset of
// the next IFD in the chain, or 0. Malformed entries are skipped.
template <typename Visitor>
size_t walk_ifd(const TiffReader& r, size_t ifd_off, Visitor&& visit) {
    uint16_t count = 0;
    if (!r.read_u16(ifd_off, count)) return 0;
    size_t entries_off = ifd_off + 2;
    for (uint32_t i = 0; i < count; ++i) {
        size_t eoff = entries_off + static_cast<size_t>(i) * 12;
        if (eoff + 12 > r.size()) break;
        Entry e;
        if (decode_entry(r, eoff, e)) visit(e);
    }
    uint32_t next = 0;
    size_t next_ptr = entries_off + static_cast<size_t>(count) * 12;
    if (!r.read_u32(next_ptr, next)) return 0;
    return next;
}

// Locates the TIFF blob: either the whole stream, or the body of the JPEG
// APP1 "Exif\0\0" segment.
std::pair<const uint8_t*, size_t> locate_tiff(const std::vector<uint8_t>& bytes) {
    if (bytes.size() >= 4 && (std::memcmp(bytes.data(), "II", 2) == 0 ||
                              std::memcmp(bytes.data(), "MM", 2) == 0)) {
        return {bytes.data(), bytes.size()};
    }
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
        size_t pos = 2;
        while (pos + 4 <= bytes.size()) {
            if (bytes[pos] != 0xFF) break;
            uint8_t marker = bytes[pos + 1];
            if (marker == 0xD9 || marker == 0xDA) break;  // EOI / start of scan
            size_t seg_len = (static_cast<size_t>(bytes[pos + 2]) << 8) | bytes[pos + 3];
            if (seg_len < 2 || pos + 2 + seg_len > bytes.size()) break;
            if (marker == 0xE1 && seg_len >= 8 &&
                std::memcmp(bytes.data() + pos + 4, "Exif\0\0", 6) == 0) {
                return {bytes.data() + pos + 10, seg_len - 8};
            }
            pos += 2 + seg_len;
        }
        throw MalformedContainer("JPEG stream has no EXIF APP1 segment");
    }
    throw MalformedContainer("input is neither a JPEG nor a TIFF stream");
}

}  // namespace

TagBundle parse_exif(const std::vector<uint8_t>& file_bytes) {
    auto [tiff, tiff_size] = locate_tiff(file_bytes);
    if (tiff_size < 8) throw MalformedContainer("TIFF header truncated");

    bool le;
    if (std::memcmp(tiff, "II", 2) == 0) le = true;
    else if (std::memcmp(tiff, "MM", 2) == 0) le = false;
    else throw MalformedContainer("invalid TIFF byte-order mark");

    TiffReader r(tiff, tiff_size, le);
    uint16_t magic = 0;
    uint32_t ifd0 = 0;
    if (!r.read_u16(2, magic) || magic != 42 || !r.read_u32(4, ifd0))
        throw MalformedContainer("invalid TIFF header");
    if (ifd0 < 8 || ifd0 >= tiff_size) throw MalformedContainer("IFD0 offset out of bounds");

    TagBundle b;
    b.source = TagSource::embedded;
    uint32_t exif_ptr = 0, gps_ptr = 0;

    size_t ifd1 = walk_ifd(r, ifd0, [&](const Entry& e) {
        switch (e.tag) {
            case exif_tag::Make: b.make = read_ascii(r, e); break;
            case exif_tag::Model: b.model = read_ascii(r, e); break;
            case exif_tag::Software: b.software = read_ascii(r, e); break;
            case exif_tag::ModifyDate: b.modify_date = read_datetime(r, e); break;
            case exif_tag::ProcessingSoftware: b.processing_software = read_ascii(r, e); break;
            case exif_tag::Artist: b.artist = read_ascii(r, e); break;
            case exif_tag::HostComputer: b.host_computer = read_ascii(r, e); break;
            case exif_tag::ImageResources: b.image_resources = read_blob(r, e); break;
            case exif_tag::ExifIfdPointer:
                if (auto v = read_unsigned(r, e)) exif_ptr = *v;
                break;
            case exif_tag::GpsIfdPointer:
                if (auto v = read_unsigned(r, e)) gps_ptr = *v;
                break;
            default: break;  // outside the target set
        }
    });

    if (exif_ptr >= 8 && exif_ptr < tiff_size) {
        walk_ifd(r, exif_ptr, [&](const Entry& e) {
            switch (e.tag) {
                case exif_tag::DateTimeOriginal: b.date_time_original = read_datetime(r, e); break;
                case exif_tag::CreateDate: b.create_date = read_datetime(r, e); break;
                default: break;
            }
        });
    }

    if (gps_ptr >= 8 && gps_ptr < tiff_size) {
        walk_ifd(r, gps_ptr, [&](const Entry& e) {
            switch (e.tag) {
                case exif_tag::GpsLatitudeRef: b.gps_latitude_ref = read_gps_ref(r, e, 'N', 'S'); break;
                case exif_tag::GpsLatitude: b.gps_latitude = read_gps_triple(r, e); break;
                case exif_tag::GpsLongitudeRef: b.gps_longitude_ref = read_gps_ref(r, e, 'E', 'W'); break;
                case exif_tag::GpsLongitude: b.gps_longitude = read_gps_triple(r, e); break;
                default: break;
            }
        });
    }

    // IFD1 carries the thumbnail via the JPEG-interchange offset/length pair.
    if (ifd1 >= 8 && ifd1 < tiff_size && ifd1 != ifd0) {
        uint32_t toff = 0, tlen = 0;
        walk_ifd(r, ifd1, [&](const Entry& e) {
            if (e.tag == exif_tag::ThumbOffset) {
                if (auto v = read_unsigned(r, e)) toff = *v;
            } else if (e.tag == exif_tag::ThumbLength) {
                if (auto v = read_unsigned(r, e)) tlen = *v;
            }
        });
        if (toff > 0 && tlen > 0) {
            std::vector<uint8_t> thumb;
            if (r.read_bytes(toff, tlen, thumb)) b.thumbnail = std::move(thumb);
        }
    }

    demote_unpaired_gps(b);
    return b;
}

}  // namespace provgraph
