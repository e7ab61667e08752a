#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vts/common.hpp"

namespace vts {

// Interleaved 8-bit RGB image, row-major.
struct ImageU8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // height * width * 3

    ImageU8() = default;
    ImageU8(int h, int w) : height(h), width(w) {
        if (h <= 0 || w <= 0) throw ZeroSizeError("ImageU8: empty dimensions");
        pixels.assign(static_cast<std::size_t>(h) * w * 3, 0);
    }

    std::uint8_t& at(int r, int c, int ch) {
        return pixels[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }
    std::uint8_t at(int r, int c, int ch) const {
        return pixels[(static_cast<std::size_t>(r) * width + c) * 3 + ch];
    }

    double mean() const;
};

// Binary PPM (P6, maxval 255).
void write_ppm(const ImageU8& img, const std::string& path);
ImageU8 read_ppm(const std::string& path);

}  // namespace vts
