#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace provgraph {

// Interleaved 8-bit raster, 1 (gray) or 3 (RGB) channels.
struct Raster {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<uint8_t> pixels;

    bool empty() const { return width == 0 || height == 0; }
    size_t index(int x, int y, int c = 0) const {
        return (static_cast<size_t>(y) * width + x) * channels + c;
    }
    uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
    void set(int x, int y, int c, uint8_t v) { pixels[index(x, y, c)] = v; }

    bool operator==(const Raster&) const = default;
};

Raster make_raster(int width, int height, int channels, uint8_t fill = 0);

// Integer luma: (77 R + 150 G + 29 B) >> 8. Identity for single-channel input.
Raster to_gray(const Raster& img);

// Binary PGM (P5) / PPM (P6), maxval 255.
Raster decode_pnm(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_pnm(const Raster& img);

Raster load_pnm(const std::string& path);
void save_pnm(const Raster& img, const std::string& path);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace provgraph
