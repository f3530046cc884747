#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "motifstore/codec.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/sequence.hpp"
#include "motifstore/synthsim.hpp"

using namespace motifstore;
using namespace motifstore::sim;

namespace {

struct Fixture {
    MotifLibrary lib = generate_library(8, 25, 10, 40, 10, 7);
    BlockLayout layout;
    Block block;

    Fixture() {
        layout.n_address_slots = 1;
        layout.n_payload_slots = 8;
        layout.motifs_per_symbol = 4;
        layout.library_size = 8;
        layout.spacer_length = 40;
        block.block_id = 3;
        block.address = {3};
        for (int s = 0; s < 8; ++s)
            block.payloads.push_back(codec::subset_unrank((s * 13 + 5) % 70, 8, 4));
    }
};

}  // namespace

TEST_CASE("assembled molecules follow the spacer/motif layout") {
    Fixture fx;
    const auto mols = assemble(fx.block, fx.lib, fx.layout, 5, 99);
    REQUIRE(mols.size() == 5);
    for (const auto& mol : mols) {
        CHECK(mol.sequence.size() == 625);  // 9*25 + 10*40
        CHECK(mol.chosen_motifs.size() == 9);
        CHECK(mol.chosen_motifs[0] == 3);  // address slot is fixed
        // sequence equals S0 m0 S1 m1 ... m8 S9
        std::string expect;
        for (int s = 0; s < 9; ++s) expect += fx.lib.spacers[s] + fx.lib.motifs[mol.chosen_motifs[s]];
        expect += fx.lib.spacers[9];
        CHECK(mol.sequence == expect);
        // payload choices come from the subsets
        for (int s = 1; s < 9; ++s)
            CHECK(fx.block.payloads[s - 1].contains(mol.chosen_motifs[s]));
    }
}

TEST_CASE("k=1 subsets make every molecule identical") {
    Fixture fx;
    fx.layout.motifs_per_symbol = 1;
    for (auto& p : fx.block.payloads) p.ids = {2};
    const auto mols = assemble(fx.block, fx.lib, fx.layout, 10, 1);
    for (const auto& mol : mols) CHECK(mol.sequence == mols[0].sequence);
}

TEST_CASE("mixture sampling is uniform over the slot subset") {
    Fixture fx;
    // 10^4 draws of one slot with k=4: each motif frequency 2500 +- 150
    std::map<int, int> counts;
    for (int i = 0; i < 10000; ++i) {
        const auto mol = assemble_one(fx.block, fx.lib, fx.layout, derive_seed(4242, 0, i));
        ++counts[mol.chosen_motifs[1]];
    }
    REQUIRE(counts.size() == 4);
    double chi2 = 0.0;
    for (const auto& [motif, count] : counts) {
        CHECK(fx.block.payloads[0].contains(motif));
        CHECK(count > 2350);
        CHECK(count < 2650);
        chi2 += (count - 2500.0) * (count - 2500.0) / 2500.0;
    }
    CHECK(chi2 < 16.27);  // chi-square critical value, 3 dof, alpha = 0.001
}

TEST_CASE("zero-rate channel is the identity") {
    Fixture fx;
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    ChannelParams zero;
    zero.p_sub = zero.p_ins = zero.p_del = zero.p_reverse = 0.0;
    const auto read = corrupt(mol, zero, 17, "r0");
    CHECK(read.bases == mol.sequence);
    CHECK_FALSE(read.reverse);
    CHECK(read.block_id == 3);
    CHECK(read.truth_motifs == mol.chosen_motifs);
}

TEST_CASE("full-deletion channel gives an empty read") {
    Fixture fx;
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    ChannelParams params;
    params.p_del = 1.0;
    params.p_sub = 0.0;
    params.p_ins = 0.0;
    params.p_reverse = 0.0;
    CHECK(corrupt(mol, params, 17, "r0").bases.empty());
}

TEST_CASE("channel event counts match configured rates within 3 sigma") {
    Fixture fx;
    ChannelParams params;
    params.p_sub = 0.03;
    params.p_ins = 0.03;
    params.p_del = 0.04;
    params.p_reverse = 0.0;

    ChannelStats stats;
    long edit_total = 0;
    int i = 0;
    while (stats.bases < 200000) {
        const auto mol = assemble_one(fx.block, fx.lib, fx.layout, derive_seed(7, 1, i));
        const auto read = corrupt(mol, params, derive_seed(7, 2, i), "r", &stats);
        edit_total += edit_distance(mol.sequence, read.bases);
        ++i;
    }
    const auto check_rate = [&](long count, double p_effective) {
        const double expect = p_effective * stats.bases;
        const double sigma = std::sqrt(stats.bases * p_effective * (1 - p_effective));
        CHECK(std::abs(count - expect) < 3 * sigma);
    };
    check_rate(stats.deletions, params.p_del);
    check_rate(stats.substitutions, (1 - params.p_del) * params.p_sub);
    check_rate(stats.insertions, params.p_ins);

    // the minimal edit distance sits slightly below the raw event count
    // because overlapping indel events compress into fewer edit operations
    const long events = stats.substitutions + stats.insertions + stats.deletions;
    CHECK(edit_total <= events);
    CHECK(edit_total > static_cast<long>(0.9 * events));
}

TEST_CASE("reverse orientation reverse-complements the read") {
    Fixture fx;
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    ChannelParams params;
    params.p_sub = params.p_ins = params.p_del = 0.0;
    params.p_reverse = 1.0;
    const auto read = corrupt(mol, params, 17, "r0");
    CHECK(read.reverse);
    CHECK(read.bases == complement_reverse(mol.sequence));
}

TEST_CASE("pore model generation: completeness and determinism") {
    CHECK(generate_pore_model(1, 9).table_size() == 4);
    const auto p6 = generate_pore_model(6, 9);
    CHECK(p6.table_size() == 4096);
    for (float m : p6.means) {
        CHECK(m >= 60.0f);
        CHECK(m <= 120.0f);
    }
    for (float s : p6.stds) CHECK(s > 0.0f);
    const auto p6b = generate_pore_model(6, 9);
    CHECK(p6.means == p6b.means);
    CHECK(p6.digest() == p6b.digest());
    CHECK(p6.digest() != generate_pore_model(6, 10).digest());
    CHECK_THROWS_AS(generate_pore_model(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_pore_model(9, 1), std::invalid_argument);
}

TEST_CASE("pore model json roundtrip") {
    const auto p = generate_pore_model(4, 3);
    const auto back = PoreModel::from_json_string(p.to_json_string());
    CHECK(back.digest() == p.digest());
}

TEST_CASE("noiseless squiggle with unit dwell equals the k-mer level track") {
    Fixture fx;
    const auto pore = generate_pore_model(6, 9);
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    const auto sq = render_squiggle(mol.sequence, pore, 1.0, 0.0, 123, "r0");
    const auto levels = kmer_levels(mol.sequence, pore);
    REQUIRE(sq.samples.size() == levels.size());
    REQUIRE(sq.samples.size() == 620);  // 625 - 6 + 1
    for (size_t i = 0; i < levels.size(); ++i) CHECK(sq.samples[i] == levels[i]);
}

TEST_CASE("squiggle sample count concentrates around windows times dwell") {
    Fixture fx;
    const auto pore = generate_pore_model(6, 9);
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    double total = 0;
    const int trials = 50;
    for (int i = 0; i < trials; ++i)
        total += render_squiggle(mol.sequence, pore, 10.0, 2.0, derive_seed(1, 2, i)).samples.size();
    const double mean = total / trials;
    // expected 620*10 = 6200; dwell std ~ 9.5 per window -> sample mean std ~ 33
    CHECK(mean > 6200 - 150);
    CHECK(mean < 6200 + 150);
}

TEST_CASE("squiggle rendering is deterministic under the seed") {
    Fixture fx;
    const auto pore = generate_pore_model(6, 9);
    const auto mol = assemble_one(fx.block, fx.lib, fx.layout, 5);
    const auto a = render_squiggle(mol.sequence, pore, 10.0, 2.0, 777);
    const auto b = render_squiggle(mol.sequence, pore, 10.0, 2.0, 777);
    CHECK(a.samples == b.samples);
    const auto c = render_squiggle(mol.sequence, pore, 10.0, 2.0, 778);
    CHECK(a.samples != c.samples);
    CHECK_THROWS_AS(render_squiggle("ACG", pore, 10.0, 2.0, 1), std::invalid_argument);
}

TEST_CASE("reads fasta and truth sidecar roundtrip") {
    Fixture fx;
    ChannelParams params;
    std::vector<Read> reads;
    for (int i = 0; i < 20; ++i) {
        const auto mol = assemble_one(fx.block, fx.lib, fx.layout, derive_seed(3, 0, i));
        reads.push_back(corrupt(mol, params, derive_seed(3, 1, i), "b000003_r" + std::to_string(i)));
    }
    const auto dir = std::filesystem::temp_directory_path();
    const auto fasta = dir / "motifstore_reads_test.fasta";
    const auto sidecar = dir / "motifstore_truth_test.jsonl";
    write_reads_fasta(fasta, reads);
    write_truth_sidecar(sidecar, reads, fx.lib.digest());

    const auto back = read_reads_fasta(fasta);
    REQUIRE(back.size() == reads.size());
    for (size_t i = 0; i < reads.size(); ++i) {
        CHECK(back[i].read_id == reads[i].read_id);
        CHECK(back[i].block_id == reads[i].block_id);
        CHECK(back[i].reverse == reads[i].reverse);
        CHECK(back[i].bases == reads[i].bases);
        CHECK(back[i].truth_motifs.empty());  // truth never leaks into the reads file
    }
    uint64_t digest = 0;
    const auto truth = read_truth_sidecar(sidecar, &digest);
    CHECK(digest == fx.lib.digest());
    REQUIRE(truth.size() == reads.size());
    for (size_t i = 0; i < reads.size(); ++i) {
        CHECK(truth[i].read_id == reads[i].read_id);
        CHECK(truth[i].slot_motifs == reads[i].truth_motifs);
    }
    std::filesystem::remove(fasta);
    std::filesystem::remove(sidecar);
}

TEST_CASE("squiggle binary container roundtrip") {
    std::vector<Squiggle> squiggles(3);
    Rng rng(5);
    for (size_t i = 0; i < squiggles.size(); ++i) {
        squiggles[i].read_id = "b000000_r000" + std::to_string(i);
        for (int s = 0; s < 100 + static_cast<int>(i); ++s)
            squiggles[i].samples.push_back(static_cast<float>(rng.normal(90, 10)));
    }
    const auto path = std::filesystem::temp_directory_path() / "motifstore_test.sqg";
    write_squiggles(path, squiggles);

    // magic check
    std::ifstream raw(path, std::ios::binary);
    char magic[4];
    raw.read(magic, 4);
    CHECK(std::string(magic, 4) == "SQG1");
    raw.close();

    const auto back = read_squiggles(path);
    REQUIRE(back.size() == squiggles.size());
    for (size_t i = 0; i < squiggles.size(); ++i) {
        CHECK(back[i].read_id == squiggles[i].read_id);
        CHECK(back[i].samples == squiggles[i].samples);
    }
    std::filesystem::remove(path);
}

TEST_CASE("channel parameter validation") {
    ChannelParams p;
    p.p_sub = 0.7;
    p.p_del = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.p_sub = -0.1;
    p.p_del = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
