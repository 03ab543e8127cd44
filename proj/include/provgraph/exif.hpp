#pragma once

#include <cstdint>
#include <vector>

#include "provgraph/tags.hpp"

namespace provgraph {

// Standard EXIF/TIFF tag IDs for the target field set. The tags live in
// IFD0, the Exif sub-IFD, the GPS sub-IFD and IFD1 (thumbnail pair).
namespace exif_tag {
inline constexpr uint16_t ProcessingSoftware = 0x000B;  // IFD0
inline constexpr uint16_t Make = 0x010F;                // IFD0
inline constexpr uint16_t Model = 0x0110;               // IFD0
inline constexpr uint16_t Software = 0x0131;            // IFD0
inline constexpr uint16_t ModifyDate = 0x0132;          // IFD0 (TIFF DateTime)
inline constexpr uint16_t Artist = 0x013B;              // IFD0
inline constexpr uint16_t HostComputer = 0x013C;        // IFD0
inline constexpr uint16_t ThumbOffset = 0x0201;         // IFD1 (JPEGInterchangeFormat)
inline constexpr uint16_t ThumbLength = 0x0202;         // IFD1
inline constexpr uint16_t ImageResources = 0x8649;      // IFD0
inline constexpr uint16_t ExifIfdPointer = 0x8769;      // IFD0
inline constexpr uint16_t GpsIfdPointer = 0x8825;       // IFD0
inline constexpr uint16_t DateTimeOriginal = 0x9003;    // Exif sub-IFD
inline constexpr uint16_t CreateDate = 0x9004;          // Exif sub-IFD (DateTimeDigitized)
inline constexpr uint16_t GpsLatitudeRef = 0x0001;      // GPS sub-IFD
inline constexpr uint16_t GpsLatitude = 0x0002;         // GPS sub-IFD
inline constexpr uint16_t GpsLongitudeRef = 0x0003;     // GPS sub-IFD
inline constexpr uint16_t GpsLongitude = 0x0004;        // GPS sub-IFD
inline constexpr uint16_t ImageWidth = 0x0100;          // IFD0, container info only
inline constexpr uint16_t ImageLength = 0x0101;         // IFD0, container info only
}  // namespace exif_tag

// Parses embedded EXIF metadata from a JPEG stream (APP1 "Exif\0\0" segment)
// or a bare TIFF stream ("II"/"MM" at offset 0). Unknown tags are skipped;
// malformed individual entries yield absent fields. Throws MalformedContainer
// when there is no usable TIFF structure at all. Never reads outside the
// input buffer.
TagBundle parse_exif(const std::vector<uint8_t>& file_bytes);

}  // namespace provgraph
