#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "motifstore/caller.hpp"
#include "motifstore/codec.hpp"
#include "motifstore/library.hpp"
#include "motifstore/pore_model.hpp"
#include "motifstore/search.hpp"
#include "motifstore/synthsim.hpp"

namespace motifstore {

struct LibraryConfig {
    int size = 8;          // M
    int motif_length = 25; // l
    int d_min = 10;
};

struct CoverageConfig {
    std::string model = "fixed";  // fixed | poisson
    double reads_per_block = 30.0;
};

struct SquiggleConfig {
    int kmer_length = 6;
    double dwell_mean = 10.0;
    double noise_std = 2.0;
};

struct RecoveryConfig {
    double threshold = 0.95;
};

// A full experiment: every knob a run needs, serializable so the exact
// resolved configuration lands next to the outputs.
struct ExperimentConfig {
    uint64_t seed = 7;
    int threads = 0;  // 0 = hardware concurrency
    LibraryConfig library;
    BlockLayout layout;
    codec::Mode codec_mode = codec::Mode::PerSymbolFloor;
    sim::ChannelParams channel;
    CoverageConfig coverage;
    SquiggleConfig squiggle;
    caller::CallerParams caller;
    search::SearchParams search;
    RecoveryConfig recovery;

    // Fills derived fields (layout.library_size, caller dwell/noise) and
    // validates cross-field consistency.
    void resolve();

    MotifLibrary make_library() const;
    PoreModel make_pore_model() const;
    int effective_threads() const;

    std::string to_json_string() const;
    static ExperimentConfig from_json_string(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace motifstore
