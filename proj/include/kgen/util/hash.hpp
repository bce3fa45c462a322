#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kgen::util {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// 64-bit FNV-1a. Stable across platforms and runs; used for request keys,
/// history digests and content-addressed record ids.
constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

inline std::string digest_hex(std::string_view s) { return to_hex(fnv1a(s)); }

}  // namespace kgen::util
