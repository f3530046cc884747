#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace motifstore::ctc {

// Token index space: motifs 0..M-1, spacers M..M+S-1, blank last.
struct TokenAlphabet {
    int n_motifs = 0;
    int n_spacers = 0;

    int size() const { return n_motifs + n_spacers + 1; }
    int blank() const { return size() - 1; }
    int motif_token(int motif_id) const { return motif_id; }
    int spacer_token(int position) const { return n_motifs + position; }
    bool is_motif(int t) const { return t >= 0 && t < n_motifs; }
    bool is_spacer(int t) const { return t >= n_motifs && t < n_motifs + n_spacers; }
    bool is_blank(int t) const { return t == blank(); }
    std::string token_name(int t) const;
};

// Per-window probability rows over the token alphabet; every row sums to 1.
struct EmissionMatrix {
    int n_windows = 0;
    int alphabet_size = 0;
    std::vector<double> probs;  // row-major

    double at(int t, int a) const { return probs[static_cast<size_t>(t) * alphabet_size + a]; }
    double& at(int t, int a) { return probs[static_cast<size_t>(t) * alphabet_size + a]; }

    static EmissionMatrix zeros(int n_windows, int alphabet_size);
    // Row-sum invariant (1 within 1e-9) and non-negativity.
    void validate() const;
    void normalize_rows();
};

// Merge maximal runs of equal tokens, then drop blanks.
std::vector<int> collapse(std::span<const int> alignment, int blank);

// Shortest alignment able to produce `target` (one window per token plus a
// mandatory blank between adjacent repeats).
int min_windows_for_target(std::span<const int> target);

struct ForwardResult {
    double loss = 0.0;   // -log P(target | emissions); +inf when infeasible
    bool feasible = true;
};

// Standard alpha recursion over the blank-interleaved target, in log space.
// The target must not contain the blank token.
ForwardResult ctc_forward(const EmissionMatrix& emissions, std::span<const int> target);

struct GradientResult {
    bool feasible = true;
    double loss = 0.0;
    // d loss / d logits for the pre-softmax logits that produced the
    // emissions; same shape as the emission matrix, row-major.
    std::vector<double> dlogits;
};

GradientResult ctc_gradient(const EmissionMatrix& emissions, std::span<const int> target);

struct GreedyResult {
    std::vector<int> tokens;                     // collapsed, never blank
    std::vector<double> confidences;             // max row prob within each merged run
    std::vector<std::pair<int, int>> spans;      // [first,last] window of each run
};

// Per-window argmax then collapse. Ties break toward the lower token index,
// blank losing all ties.
GreedyResult greedy_decode(const EmissionMatrix& emissions);

struct BeamResult {
    std::vector<int> tokens;
    double log_prob = 0.0;  // exact log P(tokens | emissions)
};

// Prefix beam search keeping the W most probable collapsed sequences,
// tracking blank/non-blank ending mass separately so merges sum correctly.
// The surviving hypotheses are rescored with the exact forward sum, so the
// reported log-probability is the sequence's true probability rather than
// the beam's pruning-dependent partial mass.
BeamResult beam_decode(const EmissionMatrix& emissions, int beam_width);

// Phred-style quality: -10*log10(1 - p), saturating at `cap`.
// Throws std::domain_error outside [0, 1).
double quality(double p_correct, double cap = 60.0);

// Binary serialization: magic "EMX1", uint32 dims, float32 rows.
void write_emissions(const std::filesystem::path& path, const EmissionMatrix& m);
EmissionMatrix read_emissions(const std::filesystem::path& path);

}  // namespace motifstore::ctc
