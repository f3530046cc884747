#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "motifstore/block.hpp"
#include "motifstore/library.hpp"
#include "motifstore/pore_model.hpp"

namespace motifstore::sim {

// One physical strand sampled from a block's composite symbols.
struct Molecule {
    int64_t block_id = 0;
    std::vector<int> chosen_motifs;  // one id per slot, address slots first
    std::string sequence;            // S0 m0 S1 m1 ... m_{n-1} Sn
};

struct ChannelParams {
    double p_sub = 0.03;
    double p_ins = 0.03;
    double p_del = 0.04;
    double p_reverse = 0.5;

    void validate() const;
};

// A simulated basecalled read. The truth_* fields exist only so experiments
// can be scored; decoders must not read them.
struct Read {
    std::string read_id;
    int64_t block_id = 0;    // ground truth
    bool reverse = false;
    std::string bases;
    std::vector<int> truth_motifs;  // per-slot chosen motif ids (ground truth)
};

struct Squiggle {
    std::string read_id;
    std::vector<float> samples;  // picoamps
    // per-sample source base index (simulation only; decoders must not use it)
    std::vector<int32_t> truth;
};

// The exact spacer/motif concatenation for the given per-slot choice.
std::string assemble_sequence(const std::vector<int>& chosen_motifs, const MotifLibrary& lib,
                              const BlockLayout& layout);

// Samples one molecule per draw; each payload slot picks uniformly from its
// subset. Deterministic under the seed.
std::vector<Molecule> assemble(const Block& block, const MotifLibrary& lib,
                               const BlockLayout& layout, int n_draws, uint64_t seed);
Molecule assemble_one(const Block& block, const MotifLibrary& lib, const BlockLayout& layout,
                      uint64_t seed);

struct ChannelStats {
    long bases = 0;
    long substitutions = 0;
    long insertions = 0;
    long deletions = 0;
};

// Per position: deletion with p_del, else substitution with p_sub (uniform
// over the 3 alternatives); an insertion of a uniform base after each
// position with p_ins; finally the whole read reverse-complements with
// p_reverse.
Read corrupt(const Molecule& molecule, const ChannelParams& params, uint64_t seed,
             std::string read_id, ChannelStats* stats = nullptr);

// For each k-mer window, a geometric (mean dwell_mean, >= 1) number of
// samples at the pore-model level plus Gaussian noise.
Squiggle render_squiggle(std::string_view seq, const PoreModel& pore, double dwell_mean,
                         double noise_std, uint64_t seed, std::string read_id = {});

// ---- file formats ----

// FASTA-like reads file; header carries read_id, block_id, orientation.
void write_reads_fasta(const std::filesystem::path& path, const std::vector<Read>& reads);
std::vector<Read> read_reads_fasta(const std::filesystem::path& path);

// Truth sidecar (JSONL): per-read ground-truth motifs, separated from the
// reads so decoders cannot consume them by accident.
void write_truth_sidecar(const std::filesystem::path& path, const std::vector<Read>& reads,
                         uint64_t library_digest);
struct TruthRecord {
    std::string read_id;
    int64_t block_id;
    bool reverse;
    std::vector<int> slot_motifs;
};
std::vector<TruthRecord> read_truth_sidecar(const std::filesystem::path& path,
                                            uint64_t* library_digest = nullptr);

// Binary squiggle container: magic "SQG1", then per record read_id length +
// bytes, sample count, little-endian float32 samples.
void write_squiggles(const std::filesystem::path& path, const std::vector<Squiggle>& squiggles);
std::vector<Squiggle> read_squiggles(const std::filesystem::path& path);

}  // namespace motifstore::sim
