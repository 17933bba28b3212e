#pragma once

#include <cstdint>
#include <vector>

#include "distaudit/image.hpp"

namespace distaudit {

// Feature vectors are plain float32 arrays; dim is the length.
using Embedding = std::vector<float>;

inline constexpr int kToyEmbedDim = 160;
inline constexpr int kToyCanvas = 96;

// Deterministic hand-crafted extractor standing in for a neural feature
// model: grayscale -> bilinear 96x96 -> 12x12 grid of 8x8 block means (144)
// -> 16-bin gradient-orientation histogram, magnitude weighted (16) ->
// L2-normalized concat. A vector with norm below 1e-12 (all-black input)
// is replaced by the first basis vector; *zero_norm reports that case.
Embedding toy_embed(const Image& img, bool* zero_norm = nullptr);

// Pre-normalization features: [0,144) block means, [144,160) histogram.
Embedding toy_raw_features(const Image& img);

// a.b / (|a||b|). Throws on dimension mismatch or a zero-norm argument.
double cosine_similarity(const Embedding& a, const Embedding& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    // Must be deterministic (same bytes in, same vector out) and safe to
    // call from multiple threads.
    virtual Embedding embed(const Image& img) const = 0;
};

class ToyProvider final : public EmbeddingProvider {
public:
    int dim() const override { return kToyEmbedDim; }
    Embedding embed(const Image& img) const override { return toy_embed(img); }
};

}  // namespace distaudit
