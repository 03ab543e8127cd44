#include "provgraph/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "provgraph/common.hpp"
#include "provgraph/exif_write.hpp"
#include "provgraph/parallel.hpp"

namespace provgraph {

namespace {

constexpr int kMinRootSide = 128;
constexpr int kMinDerivedSide = 64;
constexpr int kCropFloor = 96;  // crops and resizes need this much room

const char* kMakes[] = {"CanonX", "Nikor", "Lumax", "Pentar"};
const char* kModels[] = {"M100", "M200", "ZX-5", "Q7"};
const char* kEditors[] = {"pixforge", "imagetool", "photomix"};
const char* kArtists[] = {"alice", "bob", "carol", "dave"};

std::string two_digits(int v) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", v);
    return buf;
}

Raster downscale16(const Raster& src) {
    Raster out = make_raster(16, 16, src.channels);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < src.channels; ++c)
                out.set(x, y, c, src.at(x * src.width / 16, y * src.height / 16, c));
    return out;
}

std::vector<uint8_t> make_thumbnail(const Raster& raster) {
    return encode_pnm(downscale16(raster));
}

GpsTriple random_gps(Rng& rng) {
    return GpsTriple{Rational{static_cast<uint32_t>(rng.below(90)), 1},
                     Rational{static_cast<uint32_t>(rng.below(60)), 1},
                     Rational{static_cast<uint32_t>(rng.below(6000)), 100}};
}

TagBundle root_bundle(Rng& rng, const DateTime& t0, const Raster& raster) {
    TagBundle b;
    b.source = TagSource::embedded;
    b.date_time_original = t0;
    b.create_date = t0;
    b.modify_date = t0;
    b.make = kMakes[rng.below(4)];
    b.model = kModels[rng.below(4)];
    // firmware writes a Software tag on roughly half of captures; geotags are
    // a minority feature
    std::string firmware = std::string("Firmware 1.") + std::to_string(rng.below(10));
    if (rng.unit() < 0.5) b.software = firmware;
    bool has_gps = rng.unit() < 0.4;
    GpsTriple lat = random_gps(rng), lon = random_gps(rng);
    bool north = rng.below(2) != 0, east = rng.below(2) != 0;
    if (has_gps) {
        b.gps_latitude = lat;
        b.gps_latitude_ref = north ? "N" : "S";
        b.gps_longitude = lon;
        b.gps_longitude_ref = east ? "E" : "W";
    }
    b.thumbnail = make_thumbnail(raster);
    return b;
}

bool feasible(Transform t, const Raster& parent, size_t existing_nodes) {
    switch (t) {
        case Transform::crop:
        case Transform::resize:
            return std::min(parent.width, parent.height) >= kCropFloor;
        case Transform::splice: return existing_nodes >= 2;
        default: return true;
    }
}

}  // namespace

Transform transform_from_name(const std::string& name) {
    if (name == "crop") return Transform::crop;
    if (name == "resize") return Transform::resize;
    if (name == "brightness") return Transform::brightness;
    if (name == "blur") return Transform::blur;
    if (name == "rotate") return Transform::rotate;
    if (name == "splice") return Transform::splice;
    throw ConfigError("unknown transform: " + name);
}

std::string transform_name(Transform t) {
    switch (t) {
        case Transform::crop: return "crop";
        case Transform::resize: return "resize";
        case Transform::brightness: return "brightness";
        case Transform::blur: return "blur";
        case Transform::rotate: return "rotate";
        case Transform::splice: return "splice";
    }
    return "?";
}

Raster make_root_raster(uint64_t seed, int width, int height) {
    Rng rng(seed ^ 0x524F4F54ULL);
    Raster img = make_raster(width, height, 3);

    int base[3] = {static_cast<int>(rng.below(128)), static_cast<int>(rng.below(128)),
                   static_cast<int>(rng.below(128))};
    int gx = static_cast<int>(rng.below(96));
    int gy = static_cast<int>(rng.below(96));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            for (int c = 0; c < 3; ++c) {
                int v = base[c] + gx * x / width + gy * y / height;
                img.set(x, y, c, static_cast<uint8_t>(std::clamp(v, 0, 255)));
            }

    int shapes = 30 + static_cast<int>(rng.below(20));
    for (int s = 0; s < shapes; ++s) {
        int w = 8 + static_cast<int>(rng.below(static_cast<uint64_t>(width / 3)));
        int h = 8 + static_cast<int>(rng.below(static_cast<uint64_t>(height / 3)));
        int ox = static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, width - w))));
        int oy = static_cast<int>(rng.below(static_cast<uint64_t>(std::max(1, height - h))));
        uint8_t col[3] = {static_cast<uint8_t>(rng.below(256)), static_cast<uint8_t>(rng.below(256)),
                          static_cast<uint8_t>(rng.below(256))};
        bool ellipse = rng.below(2) != 0;
        for (int y = oy; y < oy + h; ++y)
            for (int x = ox; x < ox + w; ++x) {
                if (ellipse) {
                    // integer inside-ellipse test
                    int64_t dx = 2 * (x - ox) - w + 1;
                    int64_t dy = 2 * (y - oy) - h + 1;
                    if (dx * dx * h * h + dy * dy * w * w > static_cast<int64_t>(w) * w * h * h)
                        continue;
                }
                for (int c = 0; c < 3; ++c) img.set(x, y, c, col[c]);
            }
    }

    // Signed block overlay gives the corner detector texture everywhere.
    // 8 px blocks keep their contrast through box-blur chains, and the
    // per-image sign field makes every root's texture unique, so descriptors
    // only match along real content lineages.
    for (int y = 0; y < height; y += 8)
        for (int x = 0; x < width; x += 8) {
            int magnitude = 25 + static_cast<int>(rng.below(46));
            int jitter = rng.below(2) ? magnitude : -magnitude;
            for (int yy = y; yy < std::min(y + 8, height); ++yy)
                for (int xx = x; xx < std::min(x + 8, width); ++xx)
                    for (int c = 0; c < 3; ++c) {
                        int v = img.at(xx, yy, c) + jitter;
                        img.set(xx, yy, c, static_cast<uint8_t>(std::clamp(v, 0, 255)));
                    }
        }
    return img;
}

Raster apply_crop(const Raster& src, Rng& rng) {
    int cw = std::max(kMinDerivedSide, static_cast<int>(src.width * (720 + rng.below(231)) / 1000));
    int ch = std::max(kMinDerivedSide, static_cast<int>(src.height * (720 + rng.below(231)) / 1000));
    cw = std::min(cw, src.width);
    ch = std::min(ch, src.height);
    int ox = static_cast<int>(rng.below(static_cast<uint64_t>(src.width - cw + 1)));
    int oy = static_cast<int>(rng.below(static_cast<uint64_t>(src.height - ch + 1)));
    Raster out = make_raster(cw, ch, src.channels);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            for (int c = 0; c < src.channels; ++c) out.set(x, y, c, src.at(ox + x, oy + y, c));
    return out;
}

Raster apply_resize(const Raster& src, Rng& rng) {
    int permille = 600 + static_cast<int>(rng.below(801));  // 0.6 .. 1.4
    int tw = std::max(kMinDerivedSide, src.width * permille / 1000);
    int th = std::max(kMinDerivedSide, src.height * permille / 1000);
    Raster out = make_raster(tw, th, src.channels);
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x)
            for (int c = 0; c < src.channels; ++c)
                out.set(x, y, c, src.at(x * src.width / tw, y * src.height / th, c));
    return out;
}

Raster apply_brightness(const Raster& src, Rng& rng) {
    int delta = 10 + static_cast<int>(rng.below(31));
    if (rng.below(2)) delta = -delta;
    Raster out = src;
    for (auto& px : out.pixels)
        px = static_cast<uint8_t>(std::clamp(static_cast<int>(px) + delta, 0, 255));
    return out;
}

Raster apply_blur(const Raster& src) {
    Raster out = make_raster(src.width, src.height, src.channels);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            for (int c = 0; c < src.channels; ++c) {
                int sum = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    int yy = std::clamp(y + dy, 0, src.height - 1);
                    for (int dx = -1; dx <= 1; ++dx) {
                        int xx = std::clamp(x + dx, 0, src.width - 1);
                        sum += src.at(xx, yy, c);
                    }
                }
                out.set(x, y, c, static_cast<uint8_t>((sum + 4) / 9));
            }
    return out;
}

Raster apply_rotate(const Raster& src, Rng& rng) {
    int quarter = 1 + static_cast<int>(rng.below(3));  // 90, 180, 270
    Raster cur = src;
    for (int q = 0; q < quarter; ++q) {
        Raster out = make_raster(cur.height, cur.width, cur.channels);
        for (int y = 0; y < cur.height; ++y)
            for (int x = 0; x < cur.width; ++x)
                for (int c = 0; c < cur.channels; ++c)
                    out.set(cur.height - 1 - y, x, c, cur.at(x, y, c));
        cur = std::move(out);
    }
    return cur;
}

Raster apply_splice(const Raster& host, const Raster& donor, Rng& rng) {
    int dw = std::max(8, donor.width / 5 + static_cast<int>(rng.below(
                             static_cast<uint64_t>(std::max(1, donor.width * 3 / 10)))));
    int dh = std::max(8, donor.height / 5 + static_cast<int>(rng.below(
                             static_cast<uint64_t>(std::max(1, donor.height * 3 / 10)))));
    dw = std::min({dw, donor.width, host.width});
    dh = std::min({dh, donor.height, host.height});
    int sx = static_cast<int>(rng.below(static_cast<uint64_t>(donor.width - dw + 1)));
    int sy = static_cast<int>(rng.below(static_cast<uint64_t>(donor.height - dh + 1)));
    int tx = static_cast<int>(rng.below(static_cast<uint64_t>(host.width - dw + 1)));
    int ty = static_cast<int>(rng.below(static_cast<uint64_t>(host.height - dh + 1)));

    Raster out = host;
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x)
            for (int c = 0; c < out.channels; ++c) {
                uint8_t v = donor.channels == out.channels
                                ? donor.at(sx + x, sy + y, c)
                                : donor.at(sx + x, sy + y, 0);
                out.set(tx + x, ty + y, c, v);
            }
    return out;
}

GeneratedCase generate_case(const CaseSpec& spec, const std::vector<Raster>& roots,
                            const std::string& case_id) {
    if (spec.min_order < 2 || spec.max_order < spec.min_order)
        throw ConfigError("graph order range must start at 2");
    if (spec.menu.empty()) throw IncompatibleMenu("transform menu is empty");
    bool splice_enabled =
        std::find(spec.menu.begin(), spec.menu.end(), Transform::splice) != spec.menu.end();
    if (roots.empty() || (splice_enabled && roots.size() < 2))
        throw IncompatibleMenu(splice_enabled ? "splice needs at least two roots"
                                              : "at least one root raster required");
    for (const auto& r : roots)
        if (r.width < kMinRootSide || r.height < kMinRootSide)
            throw RootTooSmall("roots must be at least 128 px on each side");

    Rng rng(spec.seed ^ 0x47454E43415345ULL);
    GeneratedCase out;
    out.case_id = case_id;

    const int order = static_cast<int>(rng.range(spec.min_order, spec.max_order));
    const size_t root_count = std::min<size_t>(roots.size(), splice_enabled ? 2 : 1);

    // shared capture time across the case's roots
    DateTime t0;
    t0.year = 2008 + static_cast<int>(rng.below(13));
    t0.month = 1 + static_cast<int>(rng.below(12));
    t0.day = 1 + static_cast<int>(rng.below(28));
    t0.hour = static_cast<int>(rng.below(24));
    t0.minute = static_cast<int>(rng.below(60));
    t0.second = static_cast<int>(rng.below(60));

    std::vector<int> parent_of(order, -1), donor_of(order, -1);
    std::vector<GraphEdge> edges;

    for (size_t r = 0; r < root_count; ++r) {
        GeneratedAsset a;
        a.id = case_id + "n" + two_digits(static_cast<int>(r));
        a.raster = roots[r];
        a.bundle = root_bundle(rng, t0, a.raster);
        out.assets.push_back(std::move(a));
    }

    bool splice_done = false;
    for (int v = static_cast<int>(root_count); v < order; ++v) {
        const size_t existing = out.assets.size();

        int parent;
        if (rng.unit() < spec.root_bias) parent = static_cast<int>(rng.below(root_count));
        else parent = static_cast<int>(rng.below(existing));

        GeneratedAsset a;
        a.id = case_id + "n" + two_digits(v);

        // Re-sample when a transform reproduces an existing raster byte for
        // byte (two blurs of the same parent, say): provenance cases hold
        // distinct image versions.
        Transform t = Transform::brightness;
        int donor = -1;
        for (int attempt = 0; attempt < 8; ++attempt) {
            donor = -1;
            if (splice_enabled && !splice_done && attempt == 0) {
                t = Transform::splice;
            } else {
                std::vector<Transform> feasible_menu;
                for (Transform cand : spec.menu)
                    if (feasible(cand, out.assets[parent].raster, existing) &&
                        !(cand == Transform::splice && splice_done))
                        feasible_menu.push_back(cand);
                if (feasible_menu.empty()) feasible_menu.push_back(Transform::brightness);
                t = feasible_menu[rng.below(feasible_menu.size())];
            }

            switch (t) {
                case Transform::crop: a.raster = apply_crop(out.assets[parent].raster, rng); break;
                case Transform::resize:
                    a.raster = apply_resize(out.assets[parent].raster, rng);
                    break;
                case Transform::brightness:
                    a.raster = apply_brightness(out.assets[parent].raster, rng);
                    break;
                case Transform::blur: a.raster = apply_blur(out.assets[parent].raster); break;
                case Transform::rotate:
                    a.raster = apply_rotate(out.assets[parent].raster, rng);
                    break;
                case Transform::splice: {
                    do {
                        donor = static_cast<int>(rng.below(existing));
                    } while (donor == parent);
                    a.raster =
                        apply_splice(out.assets[parent].raster, out.assets[donor].raster, rng);
                    break;
                }
            }
            bool duplicate = false;
            for (const auto& other : out.assets) duplicate = duplicate || other.raster == a.raster;
            if (!duplicate) break;
        }
        if (t == Transform::splice) splice_done = true;

        // causal metadata: inherit, then apply the edit's traces; the save
        // stamps both ModifyDate and the new file's CreateDate
        TagBundle b = out.assets[parent].bundle;
        DateTime base_md = *b.modify_date;
        if (donor >= 0 && out.assets[donor].bundle.modify_date &&
            *out.assets[donor].bundle.modify_date > base_md)
            base_md = *out.assets[donor].bundle.modify_date;
        b.modify_date = add_seconds(base_md, rng.range(60, 2592000));
        b.create_date = b.modify_date;
        b.software = std::string(kEditors[rng.below(3)]) + " 2." + std::to_string(v);
        if (t == Transform::splice) {
            b.processing_software = std::string(kEditors[rng.below(3)]) + " compositor";
            b.artist = kArtists[rng.below(4)];
            b.gps_latitude.reset();
            b.gps_latitude_ref.reset();
            b.gps_longitude.reset();
            b.gps_longitude_ref.reset();
            b.thumbnail.reset();
        } else {
            b.thumbnail = make_thumbnail(a.raster);
        }
        a.bundle = std::move(b);

        parent_of[v] = parent;
        donor_of[v] = donor;
        edges.push_back({static_cast<uint32_t>(parent), static_cast<uint32_t>(v)});
        if (donor >= 0) edges.push_back({static_cast<uint32_t>(donor), static_cast<uint32_t>(v)});
        out.assets.push_back(std::move(a));
    }

    // corruption pass over derived assets
    if (spec.metadata_corruption > 0.0) {
        const double c = spec.metadata_corruption;
        for (size_t v = root_count; v < out.assets.size(); ++v) {
            TagBundle& b = out.assets[v].bundle;
            auto strip_or_perturb_date = [&](std::optional<DateTime>& field) {
                if (!field) return;
                if (rng.unit() < c) field.reset();
                else if (rng.unit() < c) {
                    int64_t delta = rng.range(1, 31536000);
                    if (rng.below(2)) delta = -delta;
                    field = add_seconds(*field, delta);
                }
            };
            auto strip = [&](auto& field) {
                if (field && rng.unit() < c) field.reset();
            };
            strip_or_perturb_date(b.date_time_original);
            strip_or_perturb_date(b.modify_date);
            strip_or_perturb_date(b.create_date);
            strip(b.gps_latitude);
            strip(b.gps_latitude_ref);
            strip(b.gps_longitude);
            strip(b.gps_longitude_ref);
            strip(b.make);
            strip(b.model);
            strip(b.software);
            strip(b.processing_software);
            strip(b.artist);
            strip(b.host_computer);
            strip(b.image_resources);
            strip(b.thumbnail);
            demote_unpaired_gps(b);
        }
    }

    std::vector<std::string> ids;
    for (const auto& a : out.assets) ids.push_back(a.id);
    out.truth = ProvenanceGraph::make(ids, std::move(edges));
    out.query_id = ids[rng.below(ids.size())];
    return out;
}

GeneratedAsset make_distractor(uint64_t seed, const std::string& id) {
    Rng rng(seed ^ 0x44495354ULL);
    GeneratedAsset a;
    a.id = id;
    a.raster = make_root_raster(rng.next(), 192 + static_cast<int>(rng.below(3)) * 32,
                                192 + static_cast<int>(rng.below(3)) * 32);
    DateTime t0;
    t0.year = 2005 + static_cast<int>(rng.below(16));
    t0.month = 1 + static_cast<int>(rng.below(12));
    t0.day = 1 + static_cast<int>(rng.below(28));
    t0.hour = static_cast<int>(rng.below(24));
    t0.minute = static_cast<int>(rng.below(60));
    t0.second = static_cast<int>(rng.below(60));
    a.bundle = root_bundle(rng, t0, a.raster);
    if (rng.below(3) == 0) {  // some distractors look edited
        a.bundle.software = std::string(kEditors[rng.below(3)]) + " 2.0";
        a.bundle.modify_date = add_seconds(t0, rng.range(60, 2592000));
    }
    return a;
}

void write_case(const GeneratedCase& c, const CaseSpec& spec, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (const auto& a : c.assets) {
        save_pnm(a.raster, dir + "/" + a.id + ".ppm");
        write_file(dir + "/" + a.id + ".exif", write_exif(a.bundle, a.raster));
    }
    write_file(dir + "/truth.bam.json", [&] {
        std::string s = bam_to_json(to_bam(c.truth), c.truth.node_ids());
        return std::vector<uint8_t>(s.begin(), s.end());
    }());
    write_file(dir + "/query.txt",
               std::vector<uint8_t>(c.query_id.begin(), c.query_id.end()));

    nlohmann::json j;
    j["case_id"] = c.case_id;
    j["min_order"] = spec.min_order;
    j["max_order"] = spec.max_order;
    std::vector<std::string> menu;
    for (Transform t : spec.menu) menu.push_back(transform_name(t));
    j["menu"] = menu;
    j["corruption"] = spec.metadata_corruption;
    j["seed"] = spec.seed;
    j["root_bias"] = spec.root_bias;
    std::string s = j.dump(1);
    write_file(dir + "/spec.json", std::vector<uint8_t>(s.begin(), s.end()));
}

std::vector<GeneratedCase> generate_suite_cases(const SuiteSpec& spec) {
    bool splice_enabled = std::find(spec.proto.menu.begin(), spec.proto.menu.end(),
                                    Transform::splice) != spec.proto.menu.end();
    int roots = std::max(spec.roots_per_case, splice_enabled ? 2 : 1);

    std::vector<uint64_t> seeds;
    Rng rng(spec.seed ^ 0x53554954ULL);
    for (int i = 0; i < spec.case_count; ++i) seeds.push_back(rng.next());

    std::vector<GeneratedCase> cases(spec.case_count);
    parallel_for(static_cast<size_t>(spec.case_count), [&](size_t i) {
        char name[16];
        std::snprintf(name, sizeof(name), "c%04zu", i);
        CaseSpec cs = spec.proto;
        cs.seed = seeds[i];
        Rng root_rng(seeds[i] ^ 0x524F4F54534BULL);
        std::vector<Raster> root_rasters;
        for (int r = 0; r < roots; ++r) root_rasters.push_back(make_root_raster(root_rng.next()));
        cases[i] = generate_case(cs, root_rasters, name);
    });
    return cases;
}

void generate_suite(const SuiteSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    auto cases = generate_suite_cases(spec);
    for (int i = 0; i < spec.case_count; ++i) {
        CaseSpec cs = spec.proto;
        write_case(cases[i], cs, out_dir + "/" + cases[i].case_id);
    }

    if (spec.distractor_count > 0) {
        Rng rng(spec.seed ^ 0x4449535452ULL);
        std::vector<uint64_t> seeds;
        for (int i = 0; i < spec.distractor_count; ++i) seeds.push_back(rng.next());
        fs::create_directories(out_dir + "/distractors");
        std::vector<GeneratedAsset> assets(spec.distractor_count);
        parallel_for(static_cast<size_t>(spec.distractor_count), [&](size_t i) {
            char name[16];
            std::snprintf(name, sizeof(name), "d%06zu", i);
            assets[i] = make_distractor(seeds[i], name);
        });
        for (const auto& a : assets) {
            save_pnm(a.raster, out_dir + "/distractors/" + a.id + ".ppm");
            write_file(out_dir + "/distractors/" + a.id + ".exif", write_exif(a.bundle, a.raster));
        }
    }

    nlohmann::json manifest;
    manifest["seed"] = spec.seed;
    std::vector<std::string> case_ids;
    for (const auto& c : cases) case_ids.push_back(c.case_id);
    manifest["cases"] = case_ids;
    manifest["distractor_count"] = spec.distractor_count;
    std::string s = manifest.dump(1);
    write_file(out_dir + "/manifest.json", std::vector<uint8_t>(s.begin(), s.end()));
}

}  // namespace provgraph
