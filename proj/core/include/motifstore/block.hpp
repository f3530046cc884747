#pragma once

#include <cstdint>
#include <vector>

#include "motifstore/library.hpp"

namespace motifstore {

// One k-of-M combinatorial symbol: a sorted set of k distinct motif ids.
struct CompositeSymbol {
    std::vector<int> ids;

    bool contains(int motif_id) const;
    void validate(int M, int k) const;

    bool operator==(const CompositeSymbol&) const = default;
};

// One stored information unit: address motifs plus per-slot motif subsets.
struct Block {
    int64_t block_id = 0;
    std::vector<int> address;                // one motif id per address slot
    std::vector<CompositeSymbol> payloads;   // one subset per payload slot

    void validate(const BlockLayout& layout) const;

    bool operator==(const Block&) const = default;
};

}  // namespace motifstore
