#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "motifstore/calls.hpp"
#include "motifstore/config.hpp"
#include "motifstore/recovery.hpp"
#include "motifstore/synthsim.hpp"

namespace motifstore::pipeline {

// Chunked static partition across threads; results must be written to
// pre-sized slots so the output order never depends on the thread count.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

// Blocks with uniformly random payload subsets, addresses carrying block_id
// in base M.
std::vector<Block> random_blocks(int n_blocks, const BlockLayout& layout, uint64_t seed);

// A simulated corpus. Squiggles are derived on demand from per-read seeds so
// large corpora never materialize them all.
struct Corpus {
    ExperimentConfig config;
    MotifLibrary library;
    PoreModel pore;
    std::vector<Block> blocks;
    std::vector<sim::Read> reads;  // block-major, read-index order
    struct Origin {
        int64_t block_id;
        int read_index;
    };
    std::vector<Origin> origins;  // parallel to reads

    sim::Squiggle squiggle_for(size_t i) const;
    std::string molecule_sequence(size_t i) const;  // oriented as sequenced
};

Corpus simulate_corpus(const ExperimentConfig& config, const std::vector<Block>& blocks);

// Per-read pipelines over the first `max_reads_per_block` reads of each
// block (the prefix is an unbiased sample of the read distribution).
CallsFile run_ze(const Corpus& corpus, size_t max_reads_per_block = SIZE_MAX);
CallsFile run_am(const Corpus& corpus, size_t max_reads_per_block = SIZE_MAX);
CallsFile run_caller(const Corpus& corpus, size_t max_reads_per_block = SIZE_MAX);

struct DilutionRow {
    std::string pipeline;
    double coverage = 0.0;  // mean reads per block
    double accuracy = 0.0;  // fraction of blocks fully recovered
};

// Poisson-coverage corpora at each level, all three pipelines, decoding
// accuracy per (pipeline, coverage).
std::vector<DilutionRow> dilution_experiment(const ExperimentConfig& config, int n_blocks,
                                             const std::vector<double>& coverages);

}  // namespace motifstore::pipeline
