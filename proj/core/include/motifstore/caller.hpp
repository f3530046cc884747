#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motifstore/calls.hpp"
#include "motifstore/ctc.hpp"
#include "motifstore/events.hpp"
#include "motifstore/library.hpp"
#include "motifstore/pore_model.hpp"
#include "motifstore/synthsim.hpp"

namespace motifstore::caller {

struct CallerParams {
    double dwell_mean = 10.0;   // samples per k-mer window the signal assumes
    double noise_std = 2.0;     // Gaussian emission scale for event matching
    double sigma_floor = 0.05;  // lower bound on the emission scale
    double stay_cost = 1.0;     // extra event on one template position
    double skip_cost = 30.0;    // template position left unmatched
    double warp_band_frac = 0.3;       // allowed duration deviation per token
    double confidence_scale = 30.0;    // logistic scale over path-score gaps
    double token_p_min = 0.85;
    double read_q_min = 11.0;
    double quality_cap = 60.0;
    double eventize_penalty = -1.0;  // < 0: derived from noise_std

    double effective_eventize_penalty() const;
};

// Expected event-level templates: per-token pore-model means of successive
// k-mers. The library and pore model ride along so decoders can compose
// junction context across token boundaries.
struct TemplateBank {
    MotifLibrary library;
    PoreModel pore;
    std::vector<std::vector<float>> motif_templates;   // length l - kappa + 1
    std::vector<std::vector<float>> spacer_templates;  // length l_s - kappa + 1
};

TemplateBank build_template_bank(const MotifLibrary& lib, const PoreModel& pore);

struct CallResult {
    ReadCall call;  // spacer tokens (slot -1) and slot motif calls, forward order
    ctc::EmissionMatrix emissions;  // one row per grammar symbol
    bool mappable = true;
    double path_cost = 0.0;
};

// Decodes the best token sequence under the layout's spacer/slot grammar via
// a left-to-right semi-Markov DP with per-token time warping; tries both
// orientations and keeps the better path. Per-token confidence is a logistic
// squashing of the best-vs-runner-up score gap.
CallResult viterbi_call(const EventSequence& events, const TemplateBank& bank,
                        const BlockLayout& layout, const CallerParams& params);

// Drops confident-scored tokens below token_p_min, then rejects the read if
// the mean quality of the surviving payload calls is below read_q_min.
// Calls without confidence estimates pass through unchanged.
ReadCall filter_call(const ReadCall& call, double read_q_min = 11.0, double token_p_min = 0.85,
                     double quality_cap = 60.0);

struct BootstrapRead {
    std::string read_id;
    double match_fraction = 0.0;   // detected fraction vs pre-synthesis truth
    std::vector<int> label_tokens; // the pipeline's called token sequence
};

// Keeps the top fraction of reads by match fraction (ties broken by
// read_id ascending); labels stay the pipeline's own calls, not the truth.
std::vector<BootstrapRead> label_bootstrap(std::vector<BootstrapRead> reads, double top_fraction);

}  // namespace motifstore::caller
