#include "provgraph/raster.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "provgraph/common.hpp"

namespace provgraph {

Raster make_raster(int width, int height, int channels, uint8_t fill) {
    Raster r;
    r.width = width;
    r.height = height;
    r.channels = channels;
    r.pixels.assign(static_cast<size_t>(width) * height * channels, fill);
    return r;
}

Raster to_gray(const Raster& img) {
    if (img.channels == 1) return img;
    Raster g = make_raster(img.width, img.height, 1);
    const uint8_t* src = img.pixels.data();
    for (size_t i = 0, n = static_cast<size_t>(img.width) * img.height; i < n; ++i) {
        const uint8_t* p = src + i * 3;
        g.pixels[i] = static_cast<uint8_t>((77 * p[0] + 150 * p[1] + 29 * p[2]) >> 8);
    }
    return g;
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comments.
bool next_token(const std::vector<uint8_t>& b, size_t& pos, std::string& tok) {
    tok.clear();
    while (pos < b.size()) {
        char c = static_cast<char>(b[pos]);
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < b.size()) {
        char c = static_cast<char>(b[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    return !tok.empty();
}

int parse_dim(const std::string& tok) {
    size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw SchemaError("bad PNM dimension: " + tok);
    return v;
}

}  // namespace

Raster decode_pnm(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    std::string tok;
    if (!next_token(bytes, pos, tok)) throw SchemaError("empty PNM stream");
    int channels = 0;
    if (tok == "P5") channels = 1;
    else if (tok == "P6") channels = 3;
    else throw SchemaError("unsupported PNM magic: " + tok);

    std::string w, h, maxv;
    if (!next_token(bytes, pos, w) || !next_token(bytes, pos, h) || !next_token(bytes, pos, maxv))
        throw SchemaError("truncated PNM header");
    if (maxv != "255") throw SchemaError("PNM maxval must be 255");
    Raster img = make_raster(parse_dim(w), parse_dim(h), channels);

    ++pos;  // single whitespace after maxval
    if (bytes.size() - pos < img.pixels.size()) throw SchemaError("truncated PNM pixel data");
    std::copy(bytes.begin() + pos, bytes.begin() + pos + img.pixels.size(), img.pixels.begin());
    return img;
}

std::vector<uint8_t> encode_pnm(const Raster& img) {
    std::string header = (img.channels == 3 ? "P6\n" : "P5\n");
    header += std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

Raster load_pnm(const std::string& path) { return decode_pnm(read_file(path)); }

void save_pnm(const Raster& img, const std::string& path) {
    write_file(path, encode_pnm(img));
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace provgraph
