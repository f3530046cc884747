#include "motifstore/events.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace motifstore::caller {

EventSequence eventize(std::span<const float> samples, double penalty) {
    const size_t n = samples.size();
    if (n == 0) throw std::invalid_argument("eventize: empty squiggle");
    if (penalty < 0) throw std::invalid_argument("eventize: negative penalty");

    // prefix sums for O(1) segment SSE
    std::vector<double> sum(n + 1, 0.0), sum2(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
        sum[i + 1] = sum[i] + samples[i];
        sum2[i + 1] = sum2[i] + static_cast<double>(samples[i]) * samples[i];
    }
    auto sse = [&](size_t a, size_t b) {  // [a, b)
        const double s = sum[b] - sum[a];
        const double s2 = sum2[b] - sum2[a];
        const double len = static_cast<double>(b - a);
        return s2 - s * s / len;
    };

    // F[t] = min over segmentations of samples[0, t); PELT keeps only
    // breakpoints that can still start an optimal final segment.
    std::vector<double> F(n + 1, std::numeric_limits<double>::infinity());
    std::vector<size_t> prev(n + 1, 0);
    F[0] = 0.0;
    std::vector<size_t> cands{0};
    std::vector<size_t> keep;
    for (size_t t = 1; t <= n; ++t) {
        double best = std::numeric_limits<double>::infinity();
        size_t arg = 0;
        for (size_t s : cands) {
            const double c = F[s] + sse(s, t) + penalty;
            if (c < best) {
                best = c;
                arg = s;
            }
        }
        F[t] = best;
        prev[t] = arg;
        keep.clear();
        for (size_t s : cands)
            if (F[s] + sse(s, t) <= F[t]) keep.push_back(s);
        keep.push_back(t);
        cands.swap(keep);
    }

    std::vector<size_t> bounds{n};
    for (size_t t = n; t > 0; t = prev[t]) bounds.push_back(prev[t]);
    std::reverse(bounds.begin(), bounds.end());

    EventSequence events;
    events.reserve(bounds.size() - 1);
    for (size_t i = 0; i + 1 < bounds.size(); ++i) {
        const size_t a = bounds[i], b = bounds[i + 1];
        events.push_back({(sum[b] - sum[a]) / static_cast<double>(b - a), static_cast<int>(b - a)});
    }
    return events;
}

}  // namespace motifstore::caller
