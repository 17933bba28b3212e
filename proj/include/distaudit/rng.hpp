#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "distaudit/hash.hpp"

namespace distaudit {

// ctr64/v1: counter-based random generator.
//
// Every draw is a pure function of (stream seed, counter), so loops over
// pixels can run in any order or on any number of threads and still produce
// identical bytes. The stream seed is derived from caller-supplied context
// (master seed, item id, operation token) via FNV-1a + the SplitMix64
// finalizer; sample i is mix64(stream + (i+1) * golden gamma), i.e. the
// SplitMix64 sequence indexed at i.
namespace ctr64 {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t at(std::uint64_t stream, std::uint64_t counter) {
    return mix64(stream + (counter + 1) * kGamma);
}

// Uniform double in [0, 1).
inline double unit(std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(at(stream, counter) >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1); never exactly 0, safe under log().
inline double unit_open(std::uint64_t stream, std::uint64_t counter) {
    return (static_cast<double>(at(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on counters (2i, 2i+1).
inline double normal(std::uint64_t stream, std::uint64_t index) {
    const double u1 = unit_open(stream, 2 * index);
    const double u2 = unit(stream, 2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace ctr64

// Derives a ctr64 stream seed from a master seed plus textual context parts.
// 0x1f separators keep ("ab","c") and ("a","bc") distinct.
std::uint64_t derive_stream(std::uint64_t master_seed, std::string_view part1,
                            std::string_view part2 = {});

// Small sequential helper over ctr64 for shuffles and subsampling, where a
// deterministic order (not parallel access) is what matters.
class SeqRng {
public:
    explicit SeqRng(std::uint64_t stream) : stream_(stream) {}

    std::uint64_t next() { return ctr64::at(stream_, counter_++); }

    // Unbiased uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n);

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool coin() { return (next() & 1u) != 0; }

    // Fisher-Yates; std::shuffle is implementation-defined, this is not.
    template <typename T>
    void shuffle(T& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace distaudit
