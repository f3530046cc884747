#include "motifstore/sequence.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace motifstore {

bool is_dna(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) {
        return c == 'A' || c == 'C' || c == 'G' || c == 'T';
    });
}

std::string complement_reverse(std::string_view s) {
    std::string out(s.size(), '\0');
    for (size_t i = 0; i < s.size(); ++i)
        out[s.size() - 1 - i] = complement_base(s[i]);
    return out;
}

int edit_distance(std::string_view a, std::string_view b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> row(m + 1);
    for (size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = diag + (a[i - 1] != b[j - 1]);
            diag = row[j];
            row[j] = std::min({sub, row[j] + 1, row[j - 1] + 1});
        }
    }
    return row[m];
}

int banded_edit_distance(std::string_view a, std::string_view b, int band) {
    const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
    const int inf = std::numeric_limits<int>::max() / 2;
    if (band < 0) band = 0;
    // Endpoints must be reachable within the band.
    if (std::abs(n - m) > band) return std::max(n, m);
    std::vector<int> prev(m + 1, inf), cur(m + 1, inf);
    for (int j = 0; j <= std::min(m, band); ++j) prev[j] = j;
    for (int i = 1; i <= n; ++i) {
        const int lo = std::max(1, i - band), hi = std::min(m, i + band);
        std::fill(cur.begin(), cur.end(), inf);
        if (i - band <= 0) cur[0] = i;
        for (int j = lo; j <= hi; ++j) {
            int best = prev[j - 1] + (a[i - 1] != b[j - 1]);
            if (prev[j] + 1 < best) best = prev[j] + 1;
            if (cur[j - 1] + 1 < best) best = cur[j - 1] + 1;
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[m] >= inf ? std::max(n, m) : prev[m];
}

int anchored_hamming(std::string_view text, long text_offset, std::string_view pattern) {
    int d = 0;
    for (size_t i = 0; i < pattern.size(); ++i) {
        const long p = text_offset + static_cast<long>(i);
        if (p < 0 || p >= static_cast<long>(text.size()) || text[p] != pattern[i]) ++d;
    }
    return d;
}

uint64_t pack_kmer(std::string_view s, size_t pos, int k) {
    if (k < 1 || k > 32) throw std::invalid_argument("pack_kmer: k must be in [1,32]");
    if (pos + static_cast<size_t>(k) > s.size())
        throw std::out_of_range("pack_kmer: window exceeds sequence");
    uint64_t v = 0;
    for (int i = 0; i < k; ++i)
        v = (v << 2) | static_cast<uint64_t>(base_index(s[pos + i]));
    return v;
}

}  // namespace motifstore
