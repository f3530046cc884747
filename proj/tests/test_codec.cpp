#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

#include "motifstore/codec.hpp"
#include "motifstore/rng.hpp"

using namespace motifstore;
using namespace motifstore::codec;

namespace {

// Pascal-triangle oracle, independent of choose()
uint64_t pascal(int n, int k) {
    std::vector<std::vector<uint64_t>> t(n + 1);
    for (int i = 0; i <= n; ++i) {
        t[i].assign(i + 1, 1);
        for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
    }
    return k <= n ? t[n][k] : 0;
}

// all sorted k-subsets of {0..M-1} in lexicographic order
void enumerate_subsets(int M, int k, int start, std::vector<int>& cur,
                       std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int v = start; v < M; ++v) {
        cur.push_back(v);
        enumerate_subsets(M, k, v + 1, cur, out);
        cur.pop_back();
    }
}

BitVec random_bits(Rng& rng, size_t n) {
    BitVec v;
    for (size_t i = 0; i < n; ++i) v.push_back(rng.bernoulli(0.5));
    return v;
}

BlockLayout default_layout() {
    BlockLayout layout;
    layout.n_address_slots = 1;
    layout.n_payload_slots = 8;
    layout.motifs_per_symbol = 4;
    layout.library_size = 8;
    return layout;
}

}  // namespace

TEST_CASE("choose: fixed values and Pascal oracle") {
    CHECK(choose(8, 4) == 70);  // log2(70) = 6.13 bits per slot
    CHECK(choose(8, 0) == 1);
    CHECK(choose(12, 5) == 792);
    CHECK(choose(0, 0) == 1);
    for (int n = 0; n <= 20; ++n)
        for (int k = 0; k <= n; ++k) CHECK(choose(n, k) == pascal(n, k));
    CHECK(choose(64, 32) == pascal(64, 32));
    CHECK_THROWS_AS(choose(5, 6), std::invalid_argument);
    CHECK_THROWS_AS(choose(65, 1), std::invalid_argument);
}

TEST_CASE("subset rank fixed values") {
    CHECK(subset_rank(CompositeSymbol{{0, 1, 2, 3}}, 8, 4) == 0);
    CHECK(subset_rank(CompositeSymbol{{4, 5, 6, 7}}, 8, 4) == 69);
    CHECK(subset_rank(CompositeSymbol{{0, 1, 2, 4}}, 8, 4) == 1);
    CHECK(subset_unrank(0, 8, 4).ids == std::vector<int>{0, 1, 2, 3});
    CHECK(subset_unrank(69, 8, 4).ids == std::vector<int>{4, 5, 6, 7});
    CHECK(subset_unrank(1, 8, 4).ids == std::vector<int>{0, 1, 2, 4});
    CHECK_THROWS_AS(subset_unrank(70, 8, 4), std::out_of_range);
    CHECK_THROWS_AS(subset_rank(CompositeSymbol{{0, 0, 1, 2}}, 8, 4), std::invalid_argument);
    CHECK_THROWS_AS(subset_rank(CompositeSymbol{{0, 1, 2}}, 8, 4), std::invalid_argument);
}

TEST_CASE("subset rank equals the position in lexicographic enumeration") {
    std::vector<std::vector<int>> all;
    std::vector<int> cur;
    enumerate_subsets(8, 4, 0, cur, all);
    REQUIRE(all.size() == 70);
    for (size_t r = 0; r < all.size(); ++r) {
        CHECK(subset_rank(CompositeSymbol{all[r]}, 8, 4) == r);
        CHECK(subset_unrank(r, 8, 4).ids == all[r]);
    }
}

TEST_CASE("subset rank/unrank bijection, exhaustive for M <= 10") {
    for (int M = 1; M <= 10; ++M) {
        for (int k = 0; k <= M; ++k) {
            const uint64_t total = choose(M, k);
            for (uint64_t r = 0; r < total; ++r) {
                const auto subset = subset_unrank(r, M, k);
                CHECK(subset_rank(subset, M, k) == r);
            }
        }
    }
}

TEST_CASE("payload bits per block: 48 floor vs 49 mixed-radix") {
    const auto layout = default_layout();
    CHECK(payload_bits_per_block(layout, Mode::PerSymbolFloor) == 48);
    CHECK(payload_bits_per_block(layout, Mode::MixedRadix) == 49);
    // the paper's density claim: 8*log2(70) = 49.07 bits per block
    CHECK(8.0 * std::log2(70.0) == doctest::Approx(49.07).epsilon(0.001));
    CHECK(std::log2(70.0) == doctest::Approx(6.13).epsilon(0.01));
}

TEST_CASE("encode block counts and padding arithmetic") {
    const auto layout = default_layout();
    const CodecConfig floor_cfg{Mode::PerSymbolFloor};

    Rng rng(1);
    CHECK(encode(BitVec{}, layout, floor_cfg).blocks.empty());

    auto bits48 = random_bits(rng, 48);
    const auto one = encode(bits48, layout, floor_cfg);
    CHECK(one.blocks.size() == 1);
    CHECK(one.padding_bits == 0);

    auto bits49 = random_bits(rng, 49);
    const auto two = encode(bits49, layout, floor_cfg);
    CHECK(two.blocks.size() == 2);
    CHECK(two.padding_bits == 47);
    CHECK(decode(two) == bits49);
}

TEST_CASE("address slots carry block_id in base M") {
    auto layout = default_layout();
    layout.n_address_slots = 2;
    Rng rng(3);
    const auto msg = encode(random_bits(rng, 48 * 70), layout, CodecConfig{Mode::PerSymbolFloor});
    REQUIRE(msg.blocks.size() == 70);
    CHECK(msg.blocks[0].address == std::vector<int>{0, 0});
    CHECK(msg.blocks[9].address == std::vector<int>{1, 1});   // 9 = 1*8 + 1
    CHECK(msg.blocks[63].address == std::vector<int>{7, 7});  // 63 = 7*8 + 7
    CHECK(msg.blocks[69].address == std::vector<int>{0, 5});  // 69 mod 64 = 5
}

TEST_CASE("mixed-radix value matches a big-integer oracle") {
    const auto layout = default_layout();
    // all payload ranks 69 -> the integer 70^8 - 1
    Block block;
    block.block_id = 0;
    block.address = {0};
    for (int s = 0; s < 8; ++s) block.payloads.push_back(subset_unrank(69, 8, 4));

    boost::multiprecision::cpp_int expect = 0;
    for (int s = 0; s < 8; ++s) expect = expect * 70 + 69;
    CHECK(expect == boost::multiprecision::pow(boost::multiprecision::cpp_int(70), 8) - 1);

    const auto v = mixed_radix_value(block, layout);
    boost::multiprecision::cpp_int got = static_cast<uint64_t>(v >> 64);
    got <<= 64;
    got += static_cast<uint64_t>(v);
    CHECK(got == expect);

    // 70^8 - 1 needs 50 bits; it cannot have come from a 49-bit encoder
    EncodedMessage msg;
    msg.layout = layout;
    msg.mode = Mode::MixedRadix;
    msg.padding_bits = 0;
    msg.blocks = {block};
    CHECK_THROWS_WITH_AS(decode(msg), doctest::Contains("exceeds block bit capacity"),
                         std::invalid_argument);
}

TEST_CASE("encode/decode roundtrip on random bitstreams, both modes") {
    const auto layout = default_layout();
    Rng rng(2024);
    for (const Mode mode : {Mode::PerSymbolFloor, Mode::MixedRadix}) {
        const CodecConfig cfg{mode};
        for (int trial = 0; trial < 1000; ++trial) {
            const auto bits = random_bits(rng, rng.below(300));
            const auto msg = encode(bits, layout, cfg);
            CHECK(decode(msg) == bits);
        }
    }
}

TEST_CASE("mixed-radix stores strictly more bits when C(M,k) is not a power of two") {
    for (int M = 4; M <= 10; ++M) {
        for (int k = 1; k < M; ++k) {
            BlockLayout layout;
            layout.library_size = M;
            layout.motifs_per_symbol = k;
            layout.n_payload_slots = 8;
            const uint64_t c = choose(M, k);
            const bool pow2 = (c & (c - 1)) == 0;
            const int floor_bits = payload_bits_per_block(layout, Mode::PerSymbolFloor);
            const int mixed_bits = payload_bits_per_block(layout, Mode::MixedRadix);
            if (pow2) CHECK(mixed_bits == floor_bits);
            else CHECK(mixed_bits > floor_bits);
        }
    }
}

TEST_CASE("decode rejects malformed subsets naming block and slot") {
    const auto layout = default_layout();
    Rng rng(11);
    auto msg = encode(random_bits(rng, 96), layout, CodecConfig{Mode::PerSymbolFloor});
    REQUIRE(msg.blocks.size() == 2);
    msg.blocks[1].payloads[3].ids = {1, 1, 2, 3};  // duplicate id
    CHECK_THROWS_WITH_AS(decode(msg), doctest::Contains("payload slot 3"), std::invalid_argument);
}

TEST_CASE("blocks file json roundtrip") {
    const auto layout = default_layout();
    Rng rng(5);
    const auto msg = encode(random_bits(rng, 200), layout, CodecConfig{Mode::MixedRadix});
    uint64_t digest = 0;
    const auto back = EncodedMessage::from_json_string(msg.to_json_string(0xabcdef), &digest);
    CHECK(digest == 0xabcdef);
    CHECK(back.padding_bits == msg.padding_bits);
    CHECK(back.mode == msg.mode);
    REQUIRE(back.blocks.size() == msg.blocks.size());
    CHECK(back.blocks == msg.blocks);
    CHECK(decode(back) == decode(msg));
}
