#include "distaudit/serial_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "distaudit/rng.hpp"

namespace distaudit::serial {

namespace {

int mirror(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace

Image to_grayscale(const Image& img) {
    check_image(img);
    if (img.channels == 1) return img;
    Image out = make_image(img.width, img.height, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = quantize_u8(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                                       0.114 * img.at(x, y, 2));
    return out;
}

Image resize_area(const Image& img, int out_w, int out_h) {
    check_image(img);
    if (out_w < 1 || out_h < 1) throw std::invalid_argument("target dimensions must be >= 1");
    if (out_w == img.width && out_h == img.height) return img;
    Image out = make_image(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            for (int c = 0; c < img.channels; ++c) {
                double sum = 0.0, wsum = 0.0;
                for (int iy = static_cast<int>(std::floor(y0));
                     iy < std::min(static_cast<int>(std::ceil(y1)), img.height); ++iy) {
                    const double wy = std::min(y1, iy + 1.0) - std::max(y0, static_cast<double>(iy));
                    if (wy <= 0.0) continue;
                    for (int ix = static_cast<int>(std::floor(x0));
                         ix < std::min(static_cast<int>(std::ceil(x1)), img.width); ++ix) {
                        const double wx =
                            std::min(x1, ix + 1.0) - std::max(x0, static_cast<double>(ix));
                        if (wx <= 0.0) continue;
                        sum += wx * wy * img.at(ix, iy, c);
                        wsum += wx * wy;
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
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1.0 - tx) * img.at(xa, ya, c) + tx * img.at(xb, ya, c);
                const double bot = (1.0 - tx) * img.at(xa, yb, c) + tx * img.at(xb, yb, c);
                out.at(ox, oy, c) = quantize_u8((1.0 - ty) * top + ty * bot);
            }
        }
    }
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    check_image(img);
    const std::vector<double> taps = gaussian_kernel(sigma);
    const int n = static_cast<int>(taps.size()), half = n / 2;
    const int W = img.width, H = img.height, C = img.channels;
    std::vector<double> tmp(img.sample_count());
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += taps[static_cast<std::size_t>(k)] * img.at(mirror(x + k - half, W), y, c);
                tmp[(static_cast<std::size_t>(y) * W + x) * C + c] = acc;
            }
    Image out = make_image(W, H, C);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += taps[static_cast<std::size_t>(k)] *
                           tmp[(static_cast<std::size_t>(mirror(y + k - half, H)) * W + x) * C + c];
                out.at(x, y, c) = quantize_u8(acc);
            }
    return out;
}

Image gaussian_blur_dense(const Image& img, double sigma) {
    check_image(img);
    const std::vector<double> taps = gaussian_kernel(sigma);
    const int n = static_cast<int>(taps.size()), half = n / 2;
    Image out = make_image(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int ky = 0; ky < n; ++ky)
                    for (int kx = 0; kx < n; ++kx)
                        acc += taps[static_cast<std::size_t>(ky)] * taps[static_cast<std::size_t>(kx)] *
                               img.at(mirror(x + kx - half, img.width),
                                      mirror(y + ky - half, img.height), c);
                out.at(x, y, c) = quantize_u8(acc);
            }
    return out;
}

Image adjust_brightness(const Image& img, double beta) {
    check_image(img);
    if (!(beta >= 0)) throw std::invalid_argument("beta must be >= 0");
    Image out = img;
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = quantize_u8(beta * img.pixels[i]);
    return out;
}

Image add_gaussian_noise(const Image& img, double sigma, const SeedContext& ctx) {
    check_image(img);
    if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
    if (sigma == 0.0) return img;
    const std::uint64_t stream = noise_stream(ctx, DistortionSpec::gaussian_noise(sigma));
    Image out = img;
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = quantize_u8(img.pixels[i] + sigma * ctr64::normal(stream, i));
    return out;
}

Image add_salt_pepper(const Image& img, double p, const SeedContext& ctx) {
    check_image(img);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
    if (p == 0.0) return img;
    const std::uint64_t stream = noise_stream(ctx, DistortionSpec::salt_pepper(p));
    Image out = img;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double u = ctr64::unit(stream, i);
        if (u >= p) continue;
        const std::uint8_t v = u < p / 2.0 ? 0 : 255;
        for (int c = 0; c < img.channels; ++c) out.pixels[i * img.channels + c] = v;
    }
    return out;
}

}  // namespace distaudit::serial
