#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace motifstore {

// FNV-1a, used as a cheap content digest to catch mismatched pipeline inputs.
inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string digest_hex(uint64_t d) {
    static const char* hex = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = hex[d & 0xF];
        d >>= 4;
    }
    return s;
}

inline uint64_t parse_digest_hex(std::string_view s) {
    uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v |= static_cast<uint64_t>(c - 'A' + 10);
        else throw std::invalid_argument("bad digest hex");
    }
    return v;
}

}  // namespace motifstore
