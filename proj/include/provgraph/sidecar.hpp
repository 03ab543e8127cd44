#pragma once

#include <map>
#include <string>
#include <vector>

#include "provgraph/tags.hpp"

namespace provgraph {

// Sidecar schema: one JSON object per image, keys are the EXIF label strings
// ("DateTimeOriginal", "GPSLatitudeRef", ...). Dates are "YYYY:MM:DD hh:mm:ss";
// GPS triples are 3-element arrays of [num, den] pairs or plain numbers;
// ImageResources / Thumbnail are hex strings. Unknown keys are ignored.
TagBundle load_sidecar(const std::string& json_text);

// Post-record schema: JSON array of
// {post_id, author, submitted_at (RFC 3339), image_ref, parent_post_id?}.
std::vector<PostRecord> load_post_records(const std::string& json_text);

// Each image_ref maps to a harvested bundle whose date_time_original is the
// earliest submitted_at among its posts. Throws DanglingParent when a
// parent_post_id points outside the collection.
std::map<std::string, TagBundle> harvest_posts(const std::vector<PostRecord>& records);

}  // namespace provgraph
