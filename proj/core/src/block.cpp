#include "motifstore/block.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace motifstore {

bool CompositeSymbol::contains(int motif_id) const {
    return std::binary_search(ids.begin(), ids.end(), motif_id);
}

void CompositeSymbol::validate(int M, int k) const {
    if (static_cast<int>(ids.size()) != k)
        throw std::invalid_argument("CompositeSymbol: expected " + std::to_string(k) +
                                    " motif ids, got " + std::to_string(ids.size()));
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= M)
            throw std::invalid_argument("CompositeSymbol: motif id out of range");
        if (i > 0 && ids[i] <= ids[i - 1])
            throw std::invalid_argument("CompositeSymbol: ids must be strictly increasing");
    }
}

void Block::validate(const BlockLayout& layout) const {
    if (static_cast<int>(address.size()) != layout.n_address_slots)
        throw std::invalid_argument("Block " + std::to_string(block_id) +
                                    ": address slot count mismatch");
    for (int a : address)
        if (a < 0 || a >= layout.library_size)
            throw std::invalid_argument("Block " + std::to_string(block_id) +
                                        ": address motif id out of range");
    if (static_cast<int>(payloads.size()) != layout.n_payload_slots)
        throw std::invalid_argument("Block " + std::to_string(block_id) +
                                    ": payload slot count mismatch");
    for (size_t s = 0; s < payloads.size(); ++s) {
        try {
            payloads[s].validate(layout.library_size, layout.motifs_per_symbol);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("Block " + std::to_string(block_id) + ", payload slot " +
                                        std::to_string(s) + ": " + e.what());
        }
    }
}

}  // namespace motifstore
