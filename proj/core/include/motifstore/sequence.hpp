#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace motifstore {

inline constexpr char kBaseChars[4] = {'A', 'C', 'G', 'T'};

inline int base_index(char b) {
    switch (b) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: throw std::invalid_argument("invalid base character: '" + std::string(1, b) + "'");
    }
}

inline char complement_base(char b) {
    switch (b) {
        case 'A': return 'T';
        case 'C': return 'G';
        case 'G': return 'C';
        case 'T': return 'A';
        default: throw std::invalid_argument("invalid base character: '" + std::string(1, b) + "'");
    }
}

bool is_dna(std::string_view s);

// Reverse complement; an involution on DNA strings.
std::string complement_reverse(std::string_view s);

// Levenshtein distance, full O(|a|*|b|) DP.
int edit_distance(std::string_view a, std::string_view b);

// Global alignment distance with unit costs, restricted to |i-j| <= band.
// Equals edit_distance when the band covers the optimal path; never smaller.
int banded_edit_distance(std::string_view a, std::string_view b, int band);

// Hamming distance over the overlap; positions of `pattern` that fall outside
// [0, |text|) when anchored at `text_offset` count as mismatches.
int anchored_hamming(std::string_view text, long text_offset, std::string_view pattern);

// 2-bit packing of the k-mer starting at pos; requires k <= 32.
uint64_t pack_kmer(std::string_view s, size_t pos, int k);

}  // namespace motifstore
