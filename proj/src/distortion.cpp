#include "distaudit/distortion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "distaudit/rng.hpp"

namespace distaudit {

namespace {

std::string fmt_num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

// Mirror index around the borders without repeating the edge sample
// (..., 2, 1, 0, 1, 2, ...). Folds as often as needed for kernels wider
// than the image.
int reflect101(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

double require_number(const nlohmann::json& obj, const char* tag, const char* field) {
    if (!obj.contains(field) || !obj[field].is_number())
        throw std::invalid_argument(std::string(tag) + "." + field + " must be a number");
    return obj[field].get<double>();
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::Identity: return "Identity";
        case Family::Occlusion: return "Occlusion";
        case Family::GaussianBlur: return "GaussianBlur";
        case Family::Brightness: return "Brightness";
        case Family::GaussianNoise: return "GaussianNoise";
        case Family::SaltPepper: return "SaltPepper";
        case Family::Resolution: return "Resolution";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    for (Family f : {Family::Identity, Family::Occlusion, Family::GaussianBlur,
                     Family::Brightness, Family::GaussianNoise, Family::SaltPepper,
                     Family::Resolution})
        if (name == family_name(f)) return f;
    throw std::invalid_argument("unknown distortion family: " + name);
}

DistortionSpec DistortionSpec::identity() { return {}; }

DistortionSpec DistortionSpec::occlusion(FaceRegion region) {
    DistortionSpec s;
    s.family = Family::Occlusion;
    s.region = region;
    return s;
}

DistortionSpec DistortionSpec::gaussian_blur(double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("GaussianBlur.sigma must be > 0");
    DistortionSpec s;
    s.family = Family::GaussianBlur;
    s.sigma = sigma;
    return s;
}

DistortionSpec DistortionSpec::brightness(double beta) {
    if (!(beta >= 0)) throw std::invalid_argument("Brightness.beta must be >= 0");
    DistortionSpec s;
    s.family = Family::Brightness;
    s.beta = beta;
    return s;
}

DistortionSpec DistortionSpec::gaussian_noise(double sigma) {
    if (!(sigma >= 0)) throw std::invalid_argument("GaussianNoise.sigma must be >= 0");
    DistortionSpec s;
    s.family = Family::GaussianNoise;
    s.sigma = sigma;
    return s;
}

DistortionSpec DistortionSpec::salt_pepper(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SaltPepper.p must be in [0, 1]");
    DistortionSpec s;
    s.family = Family::SaltPepper;
    s.p = p;
    return s;
}

DistortionSpec DistortionSpec::resolution(int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("Resolution.w and .h must be >= 1");
    DistortionSpec s;
    s.family = Family::Resolution;
    s.width = w;
    s.height = h;
    return s;
}

std::string DistortionSpec::token() const {
    switch (family) {
        case Family::Identity: return "identity";
        case Family::Occlusion: return std::string("occ:") + face_region_name(region);
        case Family::GaussianBlur: return "blur:" + fmt_num(sigma);
        case Family::Brightness: return "bright:" + fmt_num(beta);
        case Family::GaussianNoise: return "gnoise:" + fmt_num(sigma);
        case Family::SaltPepper: return "sp:" + fmt_num(p);
        case Family::Resolution:
            return "res:" + std::to_string(width) + "x" + std::to_string(height);
    }
    return "?";
}

std::string DistortionSpec::intensity_label() const {
    switch (family) {
        case Family::Identity: return "0";
        case Family::Occlusion: return face_region_name(region);
        case Family::GaussianBlur: return fmt_num(sigma);
        case Family::Brightness: return fmt_num(beta);
        case Family::GaussianNoise: return fmt_num(sigma);
        case Family::SaltPepper: return fmt_num(p);
        case Family::Resolution:
            return std::to_string(width) + "x" + std::to_string(height);
    }
    return "?";
}

nlohmann::json DistortionSpec::to_json() const {
    nlohmann::json params = nlohmann::json::object();
    switch (family) {
        case Family::Identity: break;
        case Family::Occlusion: params["region"] = face_region_name(region); break;
        case Family::GaussianBlur: params["sigma"] = sigma; break;
        case Family::Brightness: params["beta"] = beta; break;
        case Family::GaussianNoise: params["sigma"] = sigma; break;
        case Family::SaltPepper: params["p"] = p; break;
        case Family::Resolution:
            params["w"] = width;
            params["h"] = height;
            break;
    }
    return nlohmann::json{{family_name(family), params}};
}

DistortionSpec DistortionSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.size() != 1)
        throw std::invalid_argument(
            "distortion spec must be an object with exactly one family key");
    const auto it = j.begin();
    const Family family = family_from_name(it.key());
    const nlohmann::json& params = it.value();
    if (!params.is_object())
        throw std::invalid_argument(std::string(it.key()) + " parameters must be an object");

    switch (family) {
        case Family::Identity: return identity();
        case Family::Occlusion: {
            if (!params.contains("region") || !params["region"].is_string())
                throw std::invalid_argument("Occlusion.region must be a string");
            return occlusion(face_region_from_name(params["region"].get<std::string>()));
        }
        case Family::GaussianBlur:
            return gaussian_blur(require_number(params, "GaussianBlur", "sigma"));
        case Family::Brightness:
            return brightness(require_number(params, "Brightness", "beta"));
        case Family::GaussianNoise:
            return gaussian_noise(require_number(params, "GaussianNoise", "sigma"));
        case Family::SaltPepper: return salt_pepper(require_number(params, "SaltPepper", "p"));
        case Family::Resolution: {
            const double w = require_number(params, "Resolution", "w");
            const double h = require_number(params, "Resolution", "h");
            if (w != std::floor(w) || h != std::floor(h))
                throw std::invalid_argument("Resolution.w and .h must be integers");
            return resolution(static_cast<int>(w), static_cast<int>(h));
        }
    }
    throw std::invalid_argument("unknown distortion family");
}

std::vector<DistortionSpec> default_grid(Family f) {
    std::vector<DistortionSpec> grid;
    switch (f) {
        case Family::Identity: break;
        case Family::Occlusion:
            for (FaceRegion r : kAllFaceRegions) grid.push_back(DistortionSpec::occlusion(r));
            break;
        case Family::GaussianBlur:
            for (int i = 0; i <= 10; ++i)
                grid.push_back(DistortionSpec::gaussian_blur((20 + 2 * i) / 10.0));
            break;
        case Family::Brightness:
            for (int i = 0; i <= 4; ++i)
                grid.push_back(DistortionSpec::brightness((10 + 5 * i) / 10.0));
            break;
        case Family::GaussianNoise:
            for (int s : {10, 20, 30, 40})
                grid.push_back(DistortionSpec::gaussian_noise(s));
            break;
        case Family::SaltPepper:
            for (int i = 1; i <= 5; ++i)
                grid.push_back(DistortionSpec::salt_pepper(3 * i / 100.0));
            break;
        case Family::Resolution:
            for (int s : {96, 64, 48, 32, 28})
                grid.push_back(DistortionSpec::resolution(s, s));
            break;
    }
    return grid;
}

std::uint64_t noise_stream(const SeedContext& ctx, const DistortionSpec& spec) {
    return derive_stream(ctx.master_seed, ctx.item_id, spec.token());
}

int kernel_size(double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be > 0");
    return 2 * static_cast<int>(std::ceil(2.0 * sigma)) + 1;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int n = kernel_size(sigma);
    const int half = n / 2;
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = i - half;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) v /= sum;
    return w;
}

Image gaussian_blur(const Image& img, double sigma) {
    check_image(img);
    const std::vector<double> taps = gaussian_kernel(sigma);
    const int n = static_cast<int>(taps.size());
    const int half = n / 2;
    const int W = img.width, H = img.height, C = img.channels;

    // Horizontal pass into real-valued intermediate; quantize once at the end.
    std::vector<double> tmp(img.sample_count());
    #pragma omp parallel for
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += taps[static_cast<std::size_t>(k)] *
                           img.at(reflect101(x + k - half, W), y, c);
                tmp[(static_cast<std::size_t>(y) * W + x) * C + c] = acc;
            }
        }
    }

    Image out = make_image(W, H, C);
    #pragma omp parallel for
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int k = 0; k < n; ++k)
                    acc += taps[static_cast<std::size_t>(k)] *
                           tmp[(static_cast<std::size_t>(reflect101(y + k - half, H)) * W + x) * C + c];
                out.at(x, y, c) = quantize_u8(acc);
            }
        }
    }
    return out;
}

Image adjust_brightness(const Image& img, double beta) {
    check_image(img);
    if (!(beta >= 0)) throw std::invalid_argument("beta must be >= 0");
    Image out = img;
    const auto total = static_cast<long long>(img.sample_count());
    #pragma omp parallel for
    for (long long i = 0; i < total; ++i)
        out.pixels[static_cast<std::size_t>(i)] =
            quantize_u8(beta * img.pixels[static_cast<std::size_t>(i)]);
    return out;
}

Image add_gaussian_noise(const Image& img, double sigma, const SeedContext& ctx) {
    check_image(img);
    if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
    if (sigma == 0.0) return img;
    const std::uint64_t stream = noise_stream(ctx, DistortionSpec::gaussian_noise(sigma));
    Image out = img;
    const auto total = static_cast<long long>(img.sample_count());
    #pragma omp parallel for
    for (long long i = 0; i < total; ++i) {
        const double noise = sigma * ctr64::normal(stream, static_cast<std::uint64_t>(i));
        out.pixels[static_cast<std::size_t>(i)] =
            quantize_u8(img.pixels[static_cast<std::size_t>(i)] + noise);
    }
    return out;
}

Image add_salt_pepper(const Image& img, double p, const SeedContext& ctx) {
    check_image(img);
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0, 1]");
    if (p == 0.0) return img;
    const std::uint64_t stream = noise_stream(ctx, DistortionSpec::salt_pepper(p));
    Image out = img;
    const int C = img.channels;
    const auto locations = static_cast<long long>(img.pixel_count());
    #pragma omp parallel for
    for (long long i = 0; i < locations; ++i) {
        const double u = ctr64::unit(stream, static_cast<std::uint64_t>(i));
        if (u >= p) continue;
        const std::uint8_t v = u < p / 2.0 ? 0 : 255;
        for (int c = 0; c < C; ++c) out.pixels[static_cast<std::size_t>(i) * C + c] = v;
    }
    return out;
}

Image reduce_resolution(const Image& img, int w, int h, bool restore) {
    check_image(img);
    Image small = resize_area(img, w, h);
    if (!restore) return small;
    return resize_bilinear(small, img.width, img.height);
}

Image occlude(const Image& img, const KeypointSet& kps, FaceRegion region) {
    check_image(img);
    const RectRegion r = region_bbox(kps, region, img.width, img.height);
    Image out = img;
    const int C = img.channels;
    #pragma omp parallel for
    for (int y = r.y0; y < r.y1; ++y) {
        std::uint8_t* row = out.pixels.data() + (static_cast<std::size_t>(y) * img.width + r.x0) * C;
        std::memset(row, 0, static_cast<std::size_t>(r.width()) * C);
    }
    return out;
}

Image apply(const Image& img, const DistortionSpec& spec, const SeedContext& ctx,
            const KeypointSet* kps, bool restore) {
    if ((spec.family == Family::Occlusion) != (kps != nullptr))
        throw std::invalid_argument(spec.family == Family::Occlusion
                                        ? "occlusion spec requires keypoints"
                                        : "keypoints given for a non-occlusion spec");
    switch (spec.family) {
        case Family::Identity: check_image(img); return img;
        case Family::Occlusion: return occlude(img, *kps, spec.region);
        case Family::GaussianBlur: return gaussian_blur(img, spec.sigma);
        case Family::Brightness: return adjust_brightness(img, spec.beta);
        case Family::GaussianNoise: return add_gaussian_noise(img, spec.sigma, ctx);
        case Family::SaltPepper: return add_salt_pepper(img, spec.p, ctx);
        case Family::Resolution: return reduce_resolution(img, spec.width, spec.height, restore);
    }
    throw std::invalid_argument("unknown distortion family");
}

}  // namespace distaudit
