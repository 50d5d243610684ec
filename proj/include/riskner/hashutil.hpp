#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace riskner {

/// FNV-1a 64-bit hash.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

/// Current UTC time formatted as ISO-8601 ("2024-01-31T12:00:00Z").
std::string utc_timestamp_now();

}  // namespace riskner
