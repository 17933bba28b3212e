#include "distaudit/rng.hpp"

#include <cstring>

namespace distaudit {

std::uint64_t derive_stream(std::uint64_t master_seed, std::string_view part1,
                            std::string_view part2) {
    unsigned char master[8];
    for (int i = 0; i < 8; ++i) master[i] = static_cast<unsigned char>(master_seed >> (8 * i));
    std::uint64_t h = fnv1a64(master, sizeof master);
    const char sep = '\x1f';
    h = fnv1a64(&sep, 1, h);
    h = fnv1a64(part1.data(), part1.size(), h);
    h = fnv1a64(&sep, 1, h);
    h = fnv1a64(part2.data(), part2.size(), h);
    return ctr64::mix64(h);
}

std::uint64_t SeqRng::below(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling over the top multiple of n.
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
}

}  // namespace distaudit
