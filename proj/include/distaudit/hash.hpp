#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace distaudit {

// FNV-1a, 64-bit. Used for content hashes in provenance records and for
// deriving noise stream seeds. Not cryptographic.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), seed);
}

std::string to_hex(std::uint64_t v);

// FNV-1a of a file's raw bytes, formatted "fnv1a64:<hex>". Throws on I/O error.
std::string file_content_hash(const std::string& path);

}  // namespace distaudit
