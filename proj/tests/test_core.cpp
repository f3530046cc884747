#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "motifstore/bitvec.hpp"
#include "motifstore/library.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/sequence.hpp"

using namespace motifstore;

TEST_CASE("reverse complement fixed values") {
    CHECK(complement_reverse("ACGT") == "ACGT");  // self reverse-complementary
    CHECK(complement_reverse("AAAA") == "TTTT");
    CHECK(complement_reverse("") == "");
    CHECK(complement_reverse("GATTACA") == "TGTAATC");
}

TEST_CASE("reverse complement is an involution on random strings") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s(rng.below(80), 'A');
        for (auto& c : s) c = rng.random_base();
        CHECK(complement_reverse(complement_reverse(s)) == s);
    }
}

namespace {
// recursive edit distance, test-only oracle for short strings
int slow_edit(std::string_view a, std::string_view b) {
    if (a.empty()) return static_cast<int>(b.size());
    if (b.empty()) return static_cast<int>(a.size());
    const int sub = slow_edit(a.substr(1), b.substr(1)) + (a[0] != b[0]);
    const int del = slow_edit(a.substr(1), b) + 1;
    const int ins = slow_edit(a, b.substr(1)) + 1;
    return std::min({sub, del, ins});
}
}  // namespace

TEST_CASE("edit distance matches recursive oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        std::string a(rng.below(8), 'A'), b(rng.below(8), 'A');
        for (auto& c : a) c = rng.random_base();
        for (auto& c : b) c = rng.random_base();
        CHECK(edit_distance(a, b) == slow_edit(a, b));
    }
    CHECK(edit_distance("ACGT", "ACGT") == 0);
    CHECK(edit_distance("ACGT", "AGT") == 1);
}

TEST_CASE("banded edit distance equals full DP when the band is wide enough") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::string a(10 + rng.below(20), 'A'), b(10 + rng.below(20), 'A');
        for (auto& c : a) c = rng.random_base();
        for (auto& c : b) c = rng.random_base();
        const int full = edit_distance(a, b);
        CHECK(banded_edit_distance(a, b, 40) == full);
        CHECK(banded_edit_distance(a, b, 10) >= full);
    }
}

TEST_CASE("generate_library satisfies its invariants") {
    const auto lib = generate_library(8, 25, 10, 40, 10, 7);
    CHECK(lib.size() == 8);
    CHECK(lib.n_spacers() == 10);
    CHECK(lib.motif_length == 25);
    CHECK(lib.spacer_length == 40);
    for (const auto& m : lib.motifs) CHECK(m.size() == 25);
    for (const auto& s : lib.spacers) CHECK(s.size() == 40);
    // exhaustive O(M^2) distance check
    for (int i = 0; i < lib.size(); ++i)
        for (int j = i + 1; j < lib.size(); ++j)
            CHECK(edit_distance(lib.motifs[i], lib.motifs[j]) >= 10);
    CHECK_NOTHROW(lib.validate(10));
}

TEST_CASE("generate_library is a pure function of inputs and seed") {
    const auto a = generate_library(8, 25, 10, 40, 10, 42);
    const auto b = generate_library(8, 25, 10, 40, 10, 42);
    CHECK(a.to_json_string() == b.to_json_string());
    const auto c = generate_library(8, 25, 10, 40, 10, 43);
    CHECK(a.to_json_string() != c.to_json_string());
}

TEST_CASE("generate_library rejects unsatisfiable distance constraints") {
    CHECK_THROWS_WITH_AS(generate_library(2, 1, 0, 5, 2, 1),
                         doctest::Contains("d_min"), std::invalid_argument);
    // satisfiable in principle but impossible for 5 motifs of length 1
    CHECK_THROWS_AS(generate_library(5, 1, 0, 5, 1, 1), std::runtime_error);
}

TEST_CASE("library json roundtrip preserves every field") {
    const auto lib = generate_library(8, 25, 10, 40, 10, 7);
    const auto back = MotifLibrary::from_json_string(lib.to_json_string());
    CHECK(back.motifs == lib.motifs);
    CHECK(back.spacers == lib.spacers);
    CHECK(back.motif_length == lib.motif_length);
    CHECK(back.spacer_length == lib.spacer_length);
    CHECK(back.digest() == lib.digest());
}

TEST_CASE("bitvec value packing is MSB-first and roundtrips") {
    BitVec v;
    v.append_value(0b101101, 6);
    CHECK(v.size() == 6);
    CHECK(v.read_value_padded(0, 6) == 0b101101);
    CHECK(v.bit(0) == true);
    CHECK(v.bit(1) == false);
    // reads past the end are zero-padded
    CHECK(v.read_value_padded(4, 4) == 0b0100);
    const auto bytes = v.to_bytes();
    REQUIRE(bytes.size() == 1);
    CHECK(bytes[0] == 0b10110100);
    CHECK(BitVec::from_bytes(bytes).size() == 8);
}

TEST_CASE("rng streams are deterministic and independent") {
    Rng a(derive_seed(1, 2, 3));
    Rng b(derive_seed(1, 2, 3));
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
    CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("rng geometric has the requested mean") {
    Rng rng(5);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += rng.geometric_ge1(10.0);
    const double mean = sum / n;
    // std of the sample mean is about 9.5/sqrt(n) ~ 0.02
    CHECK(mean == doctest::Approx(10.0).epsilon(0.01));
    for (int i = 0; i < 100; ++i) CHECK(rng.geometric_ge1(1.0) == 1);
}
