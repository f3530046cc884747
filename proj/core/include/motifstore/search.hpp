#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "motifstore/block.hpp"
#include "motifstore/calls.hpp"
#include "motifstore/library.hpp"
#include "motifstore/synthsim.hpp"

namespace motifstore::search {

struct SearchParams {
    int k_idx = 8;         // spacer index k-mer length
    int min_support = 3;   // raw candidate k-mer votes required
    int merge_window = 10; // bases; nearby candidates for one spacer merge
    int refine_window = 5; // Hamming-scan shift range for offset correction
    int indel_tol = 5;     // allowed deviation of inter-spacer gaps from l
    int margin_min = 2;    // required best-vs-runner-up alignment margin
};

struct Posting {
    int spacer = 0;  // spacer position index
    int offset = 0;  // k-mer offset within the spacer
};

// k-mer -> postings over all spacers. Every spacer contributes exactly
// l_s - k_idx + 1 postings.
struct SpacerIndex {
    int k_idx = 0;
    std::unordered_map<uint64_t, std::vector<Posting>> postings;

    size_t n_postings() const;
};

SpacerIndex build_spacer_index(const MotifLibrary& lib, int k_idx = 8);

// Zero-error search: a motif counts only when all of its bases match
// exactly; slots are assigned from the nearest flanking exact spacer
// occurrences. Decodes both orientations and keeps the one with more spacer
// hits.
ReadCall ze_search(const sim::Read& read, const MotifLibrary& lib, const BlockLayout& layout);

// Approximate-matching search: k-mer seeding against the spacer index,
// candidate filtering/merging/refinement, chaining by the expected
// motif-spacer structure, banded alignment of the between-spacer segments,
// and per-group retention of the best-scoring chain.
ReadCall am_search(const sim::Read& read, const SpacerIndex& index, const MotifLibrary& lib,
                   const BlockLayout& layout, const SearchParams& params);

struct ReadScore {
    double detected = 0.0;  // correct payload calls / n_payload_slots
    double error = 0.0;     // wrong payload calls / payload calls made
    bool no_calls = false;  // error reported as 0 with this flag set
};

// Scores payload calls against the pre-synthesis ground truth subsets.
ReadScore score_read_vs_truth(const ReadCall& call, const Block& truth, const BlockLayout& layout);

// Same metric against a single chosen motif per slot (e.g. molecule truth).
ReadScore score_read_vs_slot_motifs(const ReadCall& call, const std::vector<int>& slot_motifs,
                                    const BlockLayout& layout);

}  // namespace motifstore::search
