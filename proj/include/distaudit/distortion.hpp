#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distaudit/image.hpp"
#include "distaudit/landmarks.hpp"

#include <nlohmann/json_fwd.hpp>

namespace distaudit {

enum class Family {
    Identity,
    Occlusion,
    GaussianBlur,
    Brightness,
    GaussianNoise,
    SaltPepper,
    Resolution,
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);

// One distortion at one intensity. Construct through the factories; they
// enforce the parameter ranges.
struct DistortionSpec {
    Family family = Family::Identity;
    FaceRegion region = FaceRegion::Eyes;  // Occlusion
    double sigma = 0.0;                    // GaussianBlur (> 0) / GaussianNoise (>= 0)
    double beta = 0.0;                     // Brightness (>= 0)
    double p = 0.0;                        // SaltPepper, in [0, 1]
    int width = 0, height = 0;             // Resolution (>= 1)

    static DistortionSpec identity();
    static DistortionSpec occlusion(FaceRegion region);
    static DistortionSpec gaussian_blur(double sigma);
    static DistortionSpec brightness(double beta);
    static DistortionSpec gaussian_noise(double sigma);
    static DistortionSpec salt_pepper(double p);
    static DistortionSpec resolution(int w, int h);

    // Stable token, e.g. "blur:2.2", "occ:Eyes", "res:32x32", "identity".
    // Used for noise stream seeding, embedding-store keys and file names.
    std::string token() const;

    // Row label in reports: "0" for identity, the bare parameter otherwise.
    std::string intensity_label() const;

    nlohmann::json to_json() const;
    // Parses {"GaussianBlur":{"sigma":2.0}} style documents; throws
    // std::invalid_argument naming the offending field.
    static DistortionSpec from_json(const nlohmann::json& j);

    bool operator==(const DistortionSpec&) const = default;
};

// Canonical intensity grids (identity excluded; audits prepend it).
std::vector<DistortionSpec> default_grid(Family f);

// Deterministic noise context: one stream per (master seed, item, spec).
struct SeedContext {
    std::uint64_t master_seed = 0;
    std::string item_id;
};

std::uint64_t noise_stream(const SeedContext& ctx, const DistortionSpec& spec);

// Filter width rule: 2 * ceil(2 sigma) + 1.
int kernel_size(double sigma);

// Normalized 1-D Gaussian taps, length kernel_size(sigma).
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian blur, horizontal then vertical pass, reflected borders
// (edge sample not repeated), quantized to 8 bits only after both passes.
Image gaussian_blur(const Image& img, double sigma);

// out = clamp(round(beta * in)) per sample.
Image adjust_brightness(const Image& img, double beta);

// Adds one independent N(0, sigma^2) draw per sample, then clamps.
Image add_gaussian_noise(const Image& img, double sigma, const SeedContext& ctx);

// One Bernoulli decision per pixel location: with probability p/2 all
// channels go to 0, with p/2 all go to 255, otherwise unchanged.
Image add_salt_pepper(const Image& img, double p, const SeedContext& ctx);

// Area-downsample to (w, h); when restore is set, bilinear-upsample back to
// the source dimensions afterwards.
Image reduce_resolution(const Image& img, int w, int h, bool restore);

// Zero-fills region_bbox(kps, region) across all channels.
Image occlude(const Image& img, const KeypointSet& kps, FaceRegion region);

// Dispatcher. kps must be present iff spec is an occlusion; `restore`
// applies to Resolution specs only.
Image apply(const Image& img, const DistortionSpec& spec, const SeedContext& ctx,
            const KeypointSet* kps = nullptr, bool restore = true);

}  // namespace distaudit
