#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "motifstore/block.hpp"
#include "motifstore/calls.hpp"
#include "motifstore/library.hpp"

namespace motifstore::recovery {

// Per-slot motif vote counters for one block. Tables built on different
// threads merge by counter addition.
struct VoteTable {
    int64_t block_id = 0;
    int reads_seen = 0;
    std::vector<std::map<int, int>> slot_votes;  // per slot: motif id -> count

    static VoteTable for_layout(int64_t block_id, const BlockLayout& layout);
    void merge(const VoteTable& other);
};

// Adds one vote per called slot; absent slots are untouched.
void vote_update(VoteTable& table, const ReadCall& calls);

struct SlotDecision {
    bool decided = false;
    std::vector<int> motifs;  // k ids for payload slots, 1 for address slots
};

// Payload slots: the k most-voted motifs (ties to the lower id; undecided
// below k distinct). Address slots: the argmax motif.
std::vector<SlotDecision> block_decision(const VoteTable& table, const BlockLayout& layout);

struct CurvePoint {
    double mean_reads = 0.0;        // mean reads consumed per block
    double recovery_fraction = 0.0; // payload (block, slot) decisions correct
};

struct BlockOutcome {
    int64_t block_id = 0;
    int reads_consumed = 0;
    bool recovered = false;  // all payload slots correct at the end
    std::vector<std::vector<int>> final_slots;
};

struct RecoveryReport {
    double threshold = 0.95;
    std::vector<CurvePoint> curve;
    double coverage_to_threshold = -1.0;  // < 0: threshold never reached
    std::vector<BlockOutcome> blocks;
    double detected_mean = 0.0;   // mean per-read detected fraction (retained reads)
    double error_mean = 0.0;      // mean per-read error fraction (retained reads)
    double retained_fraction = 1.0;

    std::string to_json_string() const;
    void save_json(const std::filesystem::path& path) const;
    void save_curve_csv(const std::filesystem::path& path) const;
    void save_blocks_csv(const std::filesystem::path& path) const;
};

// Processes retained calls in arrival order, accumulating votes block by
// block; the curve point after n reads per block uses each block's first n.
RecoveryReport recovery_curve(const std::vector<ReadCall>& calls,
                              const std::vector<Block>& truth_blocks, const BlockLayout& layout,
                              double threshold = 0.95);

// Decoding accuracy: fraction of blocks whose every payload slot decision
// equals the truth subset after consuming all calls.
double dilution_accuracy(const std::vector<ReadCall>& calls, const std::vector<Block>& truth_blocks,
                         const BlockLayout& layout);

struct QualityRow {
    double threshold = 0.0;
    double retained_pct = 0.0;
    double detected_pct = 0.0;
    double error_pct = 0.0;
    bool defined = true;  // false when no reads pass the threshold
};

// Retains reads with read_q >= threshold and reports per-threshold metrics.
std::vector<QualityRow> quality_sweep(const std::vector<ReadCall>& calls,
                                      const std::vector<Block>& truth_blocks,
                                      const BlockLayout& layout,
                                      const std::vector<double>& thresholds);

}  // namespace motifstore::recovery
