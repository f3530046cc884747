#pragma once

#include <span>
#include <vector>

namespace motifstore::caller {

// A maximal piecewise-constant segment of a squiggle.
struct Event {
    double level = 0.0;  // mean current of the segment
    int support = 0;     // samples merged into it
};

using EventSequence = std::vector<Event>;

// Optimal piecewise-constant segmentation minimizing
//   sum of squared errors + penalty * (number of segments),
// solved exactly by DP with PELT pruning. Deterministic.
EventSequence eventize(std::span<const float> samples, double penalty);

}  // namespace motifstore::caller
