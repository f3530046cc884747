#include "motifstore/codec.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/digest.hpp"

namespace motifstore::codec {

namespace {

constexpr int kMaxN = 64;

const std::array<std::array<uint64_t, kMaxN + 1>, kMaxN + 1>& binom_table() {
    static const auto table = [] {
        std::array<std::array<uint64_t, kMaxN + 1>, kMaxN + 1> t{};
        for (int n = 0; n <= kMaxN; ++n) {
            t[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

int bit_width_u128(unsigned __int128 v) {
    int w = 0;
    while (v) {
        v >>= 1;
        ++w;
    }
    return w;
}

// Capacity C(M,k)^n as a 128-bit integer; throws if it would overflow.
unsigned __int128 block_capacity(const BlockLayout& layout) {
    const unsigned __int128 radix = choose(layout.library_size, layout.motifs_per_symbol);
    unsigned __int128 cap = 1;
    for (int i = 0; i < layout.n_payload_slots; ++i) {
        if (bit_width_u128(cap) + bit_width_u128(radix) > 128)
            throw std::invalid_argument("codec: mixed-radix block capacity exceeds 128 bits");
        cap *= radix;
    }
    return cap;
}

std::vector<int> address_digits(int64_t block_id, const BlockLayout& layout) {
    std::vector<int> digits(layout.n_address_slots, 0);
    int64_t v = block_id;
    for (int i = layout.n_address_slots - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(v % layout.library_size);
        v /= layout.library_size;
    }
    return digits;
}

}  // namespace

uint64_t choose(int M, int k) {
    if (M < 0 || M > kMaxN) throw std::invalid_argument("choose: M must be in [0,64]");
    if (k < 0 || k > M) throw std::invalid_argument("choose: require 0 <= k <= M");
    return binom_table()[M][k];
}

uint64_t subset_rank(const CompositeSymbol& subset, int M, int k) {
    subset.validate(M, k);
    uint64_t rank = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int v = prev + 1; v < subset.ids[i]; ++v)
            rank += choose(M - 1 - v, k - 1 - i);
        prev = subset.ids[i];
    }
    return rank;
}

CompositeSymbol subset_unrank(uint64_t rank, int M, int k) {
    if (k < 0 || k > M) throw std::invalid_argument("subset_unrank: require 0 <= k <= M");
    if (rank >= choose(M, k)) throw std::out_of_range("subset_unrank: rank >= C(M,k)");
    CompositeSymbol out;
    out.ids.reserve(k);
    int v = 0;
    for (int i = 0; i < k; ++i) {
        while (true) {
            const uint64_t c = choose(M - 1 - v, k - 1 - i);
            if (rank < c) break;
            rank -= c;
            ++v;
        }
        out.ids.push_back(v);
        ++v;
    }
    return out;
}

std::string mode_name(Mode m) {
    return m == Mode::PerSymbolFloor ? "per-symbol-floor" : "mixed-radix";
}

Mode mode_from_name(const std::string& name) {
    if (name == "per-symbol-floor") return Mode::PerSymbolFloor;
    if (name == "mixed-radix") return Mode::MixedRadix;
    throw std::invalid_argument("unknown codec mode: " + name);
}

int payload_bits_per_block(const BlockLayout& layout, Mode mode) {
    layout.validate();
    const uint64_t c = choose(layout.library_size, layout.motifs_per_symbol);
    if (c < 2) throw std::invalid_argument("codec: C(M,k) < 2 carries no information");
    if (mode == Mode::PerSymbolFloor) {
        const int per_slot = std::bit_width(c) - 1;
        return per_slot * layout.n_payload_slots;
    }
    return bit_width_u128(block_capacity(layout)) - 1;
}

EncodedMessage encode(const BitVec& bits, const BlockLayout& layout, const CodecConfig& cfg) {
    layout.validate();
    EncodedMessage msg;
    msg.layout = layout;
    msg.mode = cfg.mode;
    if (bits.empty()) return msg;

    const int M = layout.library_size;
    const int k = layout.motifs_per_symbol;
    const uint64_t radix = choose(M, k);
    const int bpb = payload_bits_per_block(layout, cfg.mode);
    const size_t n_blocks = (bits.size() + bpb - 1) / bpb;
    msg.padding_bits = n_blocks * static_cast<size_t>(bpb) - bits.size();
    msg.blocks.reserve(n_blocks);

    size_t pos = 0;
    for (size_t b = 0; b < n_blocks; ++b) {
        Block blk;
        blk.block_id = static_cast<int64_t>(b);
        blk.address = address_digits(blk.block_id, layout);
        if (cfg.mode == Mode::PerSymbolFloor) {
            const int per_slot = bpb / layout.n_payload_slots;
            for (int s = 0; s < layout.n_payload_slots; ++s) {
                const uint64_t rank = bits.read_value_padded(pos, per_slot);
                pos += per_slot;
                blk.payloads.push_back(subset_unrank(rank, M, k));
            }
        } else {
            unsigned __int128 v = 0;
            for (int i = 0; i < bpb; ++i) {
                const size_t p = pos + static_cast<size_t>(i);
                v = (v << 1) | ((p < bits.size() && bits.bit(p)) ? 1u : 0u);
            }
            pos += bpb;
            // Most significant digit in slot 0.
            std::vector<uint64_t> ranks(layout.n_payload_slots);
            for (int s = layout.n_payload_slots - 1; s >= 0; --s) {
                ranks[s] = static_cast<uint64_t>(v % radix);
                v /= radix;
            }
            for (int s = 0; s < layout.n_payload_slots; ++s)
                blk.payloads.push_back(subset_unrank(ranks[s], M, k));
        }
        msg.blocks.push_back(std::move(blk));
    }
    return msg;
}

unsigned __int128 mixed_radix_value(const Block& block, const BlockLayout& layout) {
    layout.validate();
    block.validate(layout);
    const unsigned __int128 radix = choose(layout.library_size, layout.motifs_per_symbol);
    block_capacity(layout);  // overflow guard
    unsigned __int128 v = 0;
    for (const auto& subset : block.payloads)
        v = v * radix + subset_rank(subset, layout.library_size, layout.motifs_per_symbol);
    return v;
}

BitVec decode(const EncodedMessage& msg) {
    const BlockLayout& layout = msg.layout;
    layout.validate();
    const int M = layout.library_size;
    const int k = layout.motifs_per_symbol;
    const int bpb = payload_bits_per_block(layout, msg.mode);

    BitVec bits;
    for (size_t b = 0; b < msg.blocks.size(); ++b) {
        const Block& blk = msg.blocks[b];
        try {
            blk.validate(layout);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("decode: " + std::string(e.what()));
        }
        if (msg.mode == Mode::PerSymbolFloor) {
            const int per_slot = bpb / layout.n_payload_slots;
            for (int s = 0; s < layout.n_payload_slots; ++s) {
                const uint64_t rank = subset_rank(blk.payloads[s], M, k);
                if (rank >> per_slot)
                    throw std::invalid_argument("decode: block " + std::to_string(blk.block_id) +
                                                " slot " + std::to_string(s) +
                                                ": rank exceeds per-slot bit capacity");
                bits.append_value(rank, per_slot);
            }
        } else {
            unsigned __int128 v = mixed_radix_value(blk, layout);
            if (bit_width_u128(v) > bpb)
                throw std::invalid_argument("decode: block " + std::to_string(blk.block_id) +
                                            ": mixed-radix value exceeds block bit capacity");
            for (int i = bpb - 1; i >= 0; --i)
                bits.push_back((v >> i) & 1u);
        }
    }
    const uint64_t total = static_cast<uint64_t>(msg.blocks.size()) * bpb;
    if (msg.padding_bits > total)
        throw std::invalid_argument("decode: padding_bits exceeds total payload bits");
    return bits.prefix(total - msg.padding_bits);
}

std::string EncodedMessage::to_json_string(uint64_t library_digest) const {
    nlohmann::json j;
    j["layout"] = {{"n_address_slots", layout.n_address_slots},
                   {"n_payload_slots", layout.n_payload_slots},
                   {"motifs_per_symbol", layout.motifs_per_symbol},
                   {"library_size", layout.library_size},
                   {"spacer_length", layout.spacer_length}};
    j["codec_mode"] = mode_name(mode);
    j["padding_bits"] = padding_bits;
    j["library_digest"] = digest_hex(library_digest);
    auto& arr = j["blocks"] = nlohmann::json::array();
    for (const auto& b : blocks) {
        nlohmann::json jb;
        jb["block_id"] = b.block_id;
        jb["address"] = b.address;
        auto& subs = jb["payload_subsets"] = nlohmann::json::array();
        for (const auto& p : b.payloads) subs.push_back(p.ids);
        arr.push_back(std::move(jb));
    }
    return j.dump(2) + "\n";
}

EncodedMessage EncodedMessage::from_json_string(const std::string& text, uint64_t* library_digest) {
    const auto j = nlohmann::json::parse(text);
    EncodedMessage msg;
    const auto& jl = j.at("layout");
    msg.layout.n_address_slots = jl.at("n_address_slots").get<int>();
    msg.layout.n_payload_slots = jl.at("n_payload_slots").get<int>();
    msg.layout.motifs_per_symbol = jl.at("motifs_per_symbol").get<int>();
    msg.layout.library_size = jl.at("library_size").get<int>();
    msg.layout.spacer_length = jl.at("spacer_length").get<int>();
    msg.mode = mode_from_name(j.at("codec_mode").get<std::string>());
    msg.padding_bits = j.at("padding_bits").get<uint64_t>();
    if (library_digest) *library_digest = parse_digest_hex(j.at("library_digest").get<std::string>());
    size_t idx = 0;
    for (const auto& jb : j.at("blocks")) {
        Block b;
        b.block_id = jb.at("block_id").get<int64_t>();
        b.address = jb.at("address").get<std::vector<int>>();
        for (const auto& sub : jb.at("payload_subsets"))
            b.payloads.push_back(CompositeSymbol{sub.get<std::vector<int>>()});
        try {
            b.validate(msg.layout);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("blocks file record " + std::to_string(idx) + ": " + e.what());
        }
        msg.blocks.push_back(std::move(b));
        ++idx;
    }
    return msg;
}

void EncodedMessage::save(const std::filesystem::path& path, uint64_t library_digest) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string(library_digest);
}

EncodedMessage EncodedMessage::load(const std::filesystem::path& path, uint64_t* library_digest) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open blocks file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str(), library_digest);
}

}  // namespace motifstore::codec
