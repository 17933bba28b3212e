#pragma once

#include <cstdint>
#include <vector>

namespace distaudit {

// 8-bit raster, row-major, channel-interleaved. 1 channel (gray) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    std::size_t sample_count() const { return pixels.size(); }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const Image&) const = default;
};

// Allocates a w*h*c image filled with `fill`. Throws on invalid dimensions.
Image make_image(int width, int height, int channels, std::uint8_t fill = 0);

// Throws std::invalid_argument unless dimensions, channel count and buffer
// length are consistent.
void check_image(const Image& img);

// Rounding rule used everywhere a real value becomes an 8-bit sample:
// half-up (floor(v + 0.5)), then clamp to [0, 255].
std::uint8_t quantize_u8(double v);

// Luma conversion, round(0.299 R + 0.587 G + 0.114 B), identity on gray input.
Image to_grayscale(const Image& img);

// Area resampling: each output sample is the area-weighted mean of the source
// region it covers, per channel. Identity when target equals source size.
Image resize_area(const Image& img, int out_w, int out_h);

// Bilinear resampling with pixel centers at (x + 0.5, y + 0.5).
Image resize_bilinear(const Image& img, int out_w, int out_h);

}  // namespace distaudit
