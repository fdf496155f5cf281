#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lahar::util {

/// FNV-1a 64-bit. Stable across platforms, which committed transcript keys
/// depend on. Not cryptographic; it keys a lookup cache, nothing more.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

} // namespace lahar::util
