#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "motifstore/bitvec.hpp"
#include "motifstore/block.hpp"
#include "motifstore/library.hpp"

namespace motifstore::codec {

// Exact binomial coefficient; integer arithmetic, no overflow for M <= 64.
uint64_t choose(int M, int k);

// Lexicographic rank of a sorted k-subset of {0..M-1} (combinatorial number
// system); bijective with subset_unrank on [0, C(M,k)).
uint64_t subset_rank(const CompositeSymbol& subset, int M, int k);
CompositeSymbol subset_unrank(uint64_t rank, int M, int k);

enum class Mode {
    PerSymbolFloor,  // floor(log2 C(M,k)) bits per payload slot
    MixedRadix,      // a block's payloads form one base-C(M,k) number
};

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct CodecConfig {
    Mode mode = Mode::PerSymbolFloor;
};

// Payload bits one block can carry under the given mode.
int payload_bits_per_block(const BlockLayout& layout, Mode mode);

// A bitstream mapped onto blocks, with the padding needed to reach a whole
// number of blocks recorded out-of-band.
struct EncodedMessage {
    BlockLayout layout;
    Mode mode = Mode::PerSymbolFloor;
    uint64_t padding_bits = 0;
    std::vector<Block> blocks;

    std::string to_json_string(uint64_t library_digest) const;
    static EncodedMessage from_json_string(const std::string& text, uint64_t* library_digest = nullptr);
    void save(const std::filesystem::path& path, uint64_t library_digest) const;
    static EncodedMessage load(const std::filesystem::path& path, uint64_t* library_digest = nullptr);
};

// Deterministic bits -> blocks mapping. Zero-pads the stream to a whole
// number of blocks; address slots carry block_id in base M, most significant
// digit first.
EncodedMessage encode(const BitVec& bits, const BlockLayout& layout, const CodecConfig& cfg);

// Inverse of encode for every encode output. Throws on malformed subsets
// (naming block and slot) and on mixed-radix payload values that exceed the
// block's bit capacity.
BitVec decode(const EncodedMessage& msg);

// The base-C(M,k) integer formed by a block's payload ranks, most significant
// slot first. Requires the block capacity to fit 128 bits.
unsigned __int128 mixed_radix_value(const Block& block, const BlockLayout& layout);

}  // namespace motifstore::codec
