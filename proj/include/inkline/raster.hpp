#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace inkline {

// 8-bit grayscale image, row-major. 0 = black ink, 255 = white paper.
struct GrayRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> intensities;  // width * height entries

    std::uint8_t at(int x, int y) const {
        return intensities[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return intensities[static_cast<std::size_t>(y) * width + x];
    }
};

// Per-pixel ink mask with the same dimensions as its source image.
struct BinaryRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> foreground;  // 0 or 1, width * height entries

    bool at(int x, int y) const {
        return foreground[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) {
        foreground[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }
    // Out-of-bounds pixels read as background.
    bool at_clamped(int x, int y) const {
        if (x < 0 || y < 0 || x >= width || y >= height) return false;
        return at(x, y);
    }
    std::size_t count_foreground() const {
        std::size_t n = 0;
        for (std::uint8_t v : foreground) n += (v != 0);
        return n;
    }
};

BinaryRaster make_binary(int width, int height);

// Number of 8-connected foreground components.
int count_components8(const BinaryRaster& raster);

// PGM (portable graymap) input and output. Reading accepts both the binary
// P5 and the ASCII P2 flavor with maxval <= 255; writing emits P5.
GrayRaster read_pgm(std::istream& in);
GrayRaster read_pgm_file(const std::string& path);
void write_pgm(std::ostream& out, const GrayRaster& image);
void write_pgm_file(const std::string& path, const GrayRaster& image);

}  // namespace inkline
