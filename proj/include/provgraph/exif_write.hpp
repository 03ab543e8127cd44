#pragma once

#include <cstdint>
#include <vector>

#include "provgraph/raster.hpp"
#include "provgraph/tags.hpp"

namespace provgraph {

// Emits a minimal JPEG-with-EXIF byte stream (bare TIFF when the metadata
// block would overflow a JPEG APP1 segment) such that parse_exif recovers the
// bundle exactly, thumbnail byte-for-byte. The base image only contributes
// the ImageWidth/ImageLength container tags.
std::vector<uint8_t> write_exif(const TagBundle& bundle, const Raster& base_image);

}  // namespace provgraph
