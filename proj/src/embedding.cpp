#include "distaudit/embedding.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace distaudit {

namespace {

constexpr std::size_t kBlockFeatures = 144;
constexpr std::size_t kDim = kToyEmbedDim;

double subrange_norm(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

std::vector<double> raw_features(const Image& img) {
    const Image gray = to_grayscale(img);
    const Image canvas = resize_bilinear(gray, kToyCanvas, kToyCanvas);

    std::vector<double> f(kToyEmbedDim, 0.0);

    // 12x12 grid of 8x8 block means.
    for (int by = 0; by < 12; ++by)
        for (int bx = 0; bx < 12; ++bx) {
            double sum = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) sum += canvas.at(bx * 8 + x, by * 8 + y);
            f[static_cast<std::size_t>(by) * 12 + static_cast<std::size_t>(bx)] = sum / 64.0;
        }

    // 16-bin orientation histogram of central-difference gradients,
    // weighted by gradient magnitude. Interior pixels only.
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (int y = 1; y < kToyCanvas - 1; ++y)
        for (int x = 1; x < kToyCanvas - 1; ++x) {
            const double gx = static_cast<double>(canvas.at(x + 1, y)) - canvas.at(x - 1, y);
            const double gy = static_cast<double>(canvas.at(x, y + 1)) - canvas.at(x, y - 1);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0) continue;
            const double angle = std::atan2(gy, gx);  // [-pi, pi]
            int bin = static_cast<int>((angle + kTwoPi / 2.0) / kTwoPi * 16.0);
            if (bin > 15) bin = 15;  // angle == +pi
            if (bin < 0) bin = 0;
            f[kBlockFeatures + static_cast<std::size_t>(bin)] += mag;
        }
    return f;
}

}  // namespace

Embedding toy_raw_features(const Image& img) {
    const std::vector<double> f = raw_features(img);
    Embedding out(kToyEmbedDim);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(f[i]);
    return out;
}

Embedding toy_embed(const Image& img, bool* zero_norm) {
    std::vector<double> f = raw_features(img);

    // Balance the two feature groups before the final normalization. Raw
    // magnitude-weighted histogram bins run orders of magnitude larger than
    // 8-bit block means and would otherwise decide the whole similarity.
    // The block grid is the workhorse, the orientation histogram refines
    // clean matches.
    constexpr double kBlockWeight = 0.9;
    constexpr double kHistWeight = 0.45;
    const double block_norm = subrange_norm(f, 0, kBlockFeatures);
    const double hist_norm = subrange_norm(f, kBlockFeatures, kDim);
    if (block_norm > 1e-12)
        for (std::size_t i = 0; i < kBlockFeatures; ++i) f[i] *= kBlockWeight / block_norm;
    if (hist_norm > 1e-12)
        for (std::size_t i = kBlockFeatures; i < kDim; ++i)
            f[i] *= kHistWeight / hist_norm;

    const double norm = subrange_norm(f, 0, kDim);
    if (zero_norm) *zero_norm = false;
    if (norm < 1e-12) {
        // All-black input. Fall back to the first basis vector so similarity
        // stays defined.
        if (zero_norm) *zero_norm = true;
        Embedding e1(kToyEmbedDim, 0.0f);
        e1[0] = 1.0f;
        return e1;
    }
    Embedding out(kToyEmbedDim);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(f[i] / norm);
    return out;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("embedding dimensions differ: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    if (a.empty()) throw std::invalid_argument("empty embedding");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace distaudit
