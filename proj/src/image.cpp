#include "distaudit/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace distaudit {

namespace {

constexpr std::size_t kMaxSamples = std::size_t{1} << 31;

void check_dims(int width, int height, int channels) {
    if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("channel count must be 1 or 3, got " +
                                    std::to_string(channels));
    const auto samples = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                         static_cast<std::size_t>(channels);
    if (samples > kMaxSamples) throw std::invalid_argument("image dimension overflow");
}

}  // namespace

Image make_image(int width, int height, int channels, std::uint8_t fill) {
    check_dims(width, height, channels);
    Image img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.pixels.assign(static_cast<std::size_t>(width) * height * channels, fill);
    return img;
}

void check_image(const Image& img) {
    check_dims(img.width, img.height, img.channels);
    const auto expected = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (img.pixels.size() != expected)
        throw std::invalid_argument("pixel buffer length does not match dimensions");
}

std::uint8_t quantize_u8(double v) {
    const double r = std::floor(v + 0.5);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

Image to_grayscale(const Image& img) {
    check_image(img);
    if (img.channels == 1) return img;
    Image out = make_image(img.width, img.height, 1);
    #pragma omp parallel for
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* src = img.pixels.data() + static_cast<std::size_t>(y) * img.width * 3;
        std::uint8_t* dst = out.pixels.data() + static_cast<std::size_t>(y) * img.width;
        for (int x = 0; x < img.width; ++x) {
            const double g =
                0.299 * src[3 * x] + 0.587 * src[3 * x + 1] + 0.114 * src[3 * x + 2];
            dst[x] = quantize_u8(g);
        }
    }
    return out;
}

Image resize_area(const Image& img, int out_w, int out_h) {
    check_image(img);
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("target dimensions must be >= 1");
    if (out_w == img.width && out_h == img.height) return img;

    Image out = make_image(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    const int ch = img.channels;

    #pragma omp parallel for
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * sy;
        const double y1 = (oy + 1) * sy;
        const int iy0 = static_cast<int>(std::floor(y0));
        const int iy1 = std::min(static_cast<int>(std::ceil(y1)), img.height);
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * sx;
            const double x1 = (ox + 1) * sx;
            const int ix0 = static_cast<int>(std::floor(x0));
            const int ix1 = std::min(static_cast<int>(std::ceil(x1)), img.width);
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0, wsum = 0.0;
                for (int iy = iy0; iy < iy1; ++iy) {
                    const double wy =
                        std::min(y1, static_cast<double>(iy + 1)) - std::max(y0, static_cast<double>(iy));
                    if (wy <= 0.0) continue;
                    for (int ix = ix0; ix < ix1; ++ix) {
                        const double wx = std::min(x1, static_cast<double>(ix + 1)) -
                                          std::max(x0, static_cast<double>(ix));
                        if (wx <= 0.0) continue;
                        const double w = wx * wy;
                        sum += w * img.at(ix, iy, c);
                        wsum += w;
                    }
                }
                out.at(ox, oy, c) = quantize_u8(sum / wsum);
            }
        }
    }
    return out;
}

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    check_image(img);
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("target dimensions must be >= 1");
    if (out_w == img.width && out_h == img.height) return img;

    Image out = make_image(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    const int ch = img.channels;

    #pragma omp parallel for
    for (int oy = 0; oy < out_h; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double ty = fy - y0;
        const int ya = std::clamp(y0, 0, img.height - 1);
        const int yb = std::clamp(y0 + 1, 0, img.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double tx = fx - x0;
            const int xa = std::clamp(x0, 0, img.width - 1);
            const int xb = std::clamp(x0 + 1, 0, img.width - 1);
            for (int c = 0; c < ch; ++c) {
                const double top = (1.0 - tx) * img.at(xa, ya, c) + tx * img.at(xb, ya, c);
                const double bot = (1.0 - tx) * img.at(xa, yb, c) + tx * img.at(xb, yb, c);
                out.at(ox, oy, c) = quantize_u8((1.0 - ty) * top + ty * bot);
            }
        }
    }
    return out;
}

}  // namespace distaudit
