#include "motifstore/ctc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace motifstore::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::vector<double> log_probs(const EmissionMatrix& m) {
    std::vector<double> lp(m.probs.size());
    for (size_t i = 0; i < lp.size(); ++i)
        lp[i] = m.probs[i] > 0 ? std::log(m.probs[i]) : kNegInf;
    return lp;
}

// Blank-interleaved target: [blank, y0, blank, y1, ..., blank].
std::vector<int> extend_target(std::span<const int> target, int blank) {
    std::vector<int> z;
    z.reserve(target.size() * 2 + 1);
    z.push_back(blank);
    for (int y : target) {
        z.push_back(y);
        z.push_back(blank);
    }
    return z;
}

void check_target(const EmissionMatrix& m, std::span<const int> target) {
    for (int y : target)
        if (y < 0 || y >= m.alphabet_size - 1)
            throw std::invalid_argument("ctc: target token out of range or blank");
}

// alpha[t][s] — log prob of paths through z[0..s] consuming windows 0..t,
// including the emission at t.
std::vector<double> alpha_recursion(const std::vector<double>& lp, int T, int A,
                                    const std::vector<int>& z) {
    const int S = static_cast<int>(z.size());
    std::vector<double> alpha(static_cast<size_t>(T) * S, kNegInf);
    auto lpv = [&](int t, int tok) { return lp[static_cast<size_t>(t) * A + tok]; };
    alpha[0] = lpv(0, z[0]);
    if (S > 1) alpha[1] = lpv(0, z[1]);
    for (int t = 1; t < T; ++t) {
        for (int s = 0; s < S; ++s) {
            double acc = alpha[static_cast<size_t>(t - 1) * S + s];
            if (s >= 1) acc = lse(acc, alpha[static_cast<size_t>(t - 1) * S + s - 1]);
            if (s >= 2 && z[s] != z[s - 2])
                acc = lse(acc, alpha[static_cast<size_t>(t - 1) * S + s - 2]);
            alpha[static_cast<size_t>(t) * S + s] = acc + lpv(t, z[s]);
        }
    }
    return alpha;
}

// beta[t][s] — log prob of paths through z[s..] consuming windows t..T-1,
// including the emission at t.
std::vector<double> beta_recursion(const std::vector<double>& lp, int T, int A,
                                   const std::vector<int>& z) {
    const int S = static_cast<int>(z.size());
    std::vector<double> beta(static_cast<size_t>(T) * S, kNegInf);
    auto lpv = [&](int t, int tok) { return lp[static_cast<size_t>(t) * A + tok]; };
    beta[static_cast<size_t>(T - 1) * S + S - 1] = lpv(T - 1, z[S - 1]);
    if (S > 1) beta[static_cast<size_t>(T - 1) * S + S - 2] = lpv(T - 1, z[S - 2]);
    for (int t = T - 2; t >= 0; --t) {
        for (int s = S - 1; s >= 0; --s) {
            double acc = beta[static_cast<size_t>(t + 1) * S + s];
            if (s + 1 < S) acc = lse(acc, beta[static_cast<size_t>(t + 1) * S + s + 1]);
            if (s + 2 < S && z[s] != z[s + 2])
                acc = lse(acc, beta[static_cast<size_t>(t + 1) * S + s + 2]);
            beta[static_cast<size_t>(t) * S + s] = acc + lpv(t, z[s]);
        }
    }
    return beta;
}

}  // namespace

std::string TokenAlphabet::token_name(int t) const {
    if (is_motif(t)) return "M" + std::to_string(t);
    if (is_spacer(t)) return "S" + std::to_string(t - n_motifs);
    if (is_blank(t)) return "phi";
    return "?" + std::to_string(t);
}

EmissionMatrix EmissionMatrix::zeros(int n_windows, int alphabet_size) {
    EmissionMatrix m;
    m.n_windows = n_windows;
    m.alphabet_size = alphabet_size;
    m.probs.assign(static_cast<size_t>(n_windows) * alphabet_size, 0.0);
    return m;
}

void EmissionMatrix::validate() const {
    if (n_windows < 1 || alphabet_size < 2)
        throw std::invalid_argument("EmissionMatrix: need n_windows >= 1, alphabet >= 2");
    if (probs.size() != static_cast<size_t>(n_windows) * alphabet_size)
        throw std::invalid_argument("EmissionMatrix: shape mismatch");
    for (int t = 0; t < n_windows; ++t) {
        double sum = 0.0;
        for (int a = 0; a < alphabet_size; ++a) {
            const double p = at(t, a);
            if (p < 0.0) throw std::invalid_argument("EmissionMatrix: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("EmissionMatrix: row " + std::to_string(t) +
                                        " sums to " + std::to_string(sum));
    }
}

void EmissionMatrix::normalize_rows() {
    for (int t = 0; t < n_windows; ++t) {
        double sum = 0.0;
        for (int a = 0; a < alphabet_size; ++a) sum += at(t, a);
        if (sum <= 0.0) throw std::invalid_argument("EmissionMatrix: row with no mass");
        for (int a = 0; a < alphabet_size; ++a) at(t, a) /= sum;
    }
}

std::vector<int> collapse(std::span<const int> alignment, int blank) {
    std::vector<int> out;
    int prev = -1;
    for (int t : alignment) {
        if (t != prev && t != blank) out.push_back(t);
        prev = t;
    }
    return out;
}

int min_windows_for_target(std::span<const int> target) {
    int n = static_cast<int>(target.size());
    for (size_t i = 1; i < target.size(); ++i)
        if (target[i] == target[i - 1]) ++n;
    return n;
}

ForwardResult ctc_forward(const EmissionMatrix& emissions, std::span<const int> target) {
    emissions.validate();
    check_target(emissions, target);
    const int T = emissions.n_windows;
    const int A = emissions.alphabet_size;
    const int blank = A - 1;
    if (min_windows_for_target(target) > T)
        return {std::numeric_limits<double>::infinity(), false};

    const auto lp = log_probs(emissions);
    const auto z = extend_target(target, blank);
    const int S = static_cast<int>(z.size());
    const auto alpha = alpha_recursion(lp, T, A, z);
    double logp = alpha[static_cast<size_t>(T - 1) * S + S - 1];
    if (S > 1) logp = lse(logp, alpha[static_cast<size_t>(T - 1) * S + S - 2]);
    if (logp == kNegInf) return {std::numeric_limits<double>::infinity(), false};
    return {-logp, true};
}

GradientResult ctc_gradient(const EmissionMatrix& emissions, std::span<const int> target) {
    emissions.validate();
    check_target(emissions, target);
    const int T = emissions.n_windows;
    const int A = emissions.alphabet_size;
    const int blank = A - 1;
    GradientResult res;
    if (min_windows_for_target(target) > T) {
        res.feasible = false;
        res.loss = std::numeric_limits<double>::infinity();
        return res;
    }
    const auto lp = log_probs(emissions);
    const auto z = extend_target(target, blank);
    const int S = static_cast<int>(z.size());
    const auto alpha = alpha_recursion(lp, T, A, z);
    const auto beta = beta_recursion(lp, T, A, z);

    double logp = alpha[static_cast<size_t>(T - 1) * S + S - 1];
    if (S > 1) logp = lse(logp, alpha[static_cast<size_t>(T - 1) * S + S - 2]);
    if (logp == kNegInf) {
        res.feasible = false;
        res.loss = std::numeric_limits<double>::infinity();
        return res;
    }
    res.loss = -logp;

    // d(-log P)/d(logit[t][k]) = p[t][k] - (sum_{s: z_s=k} alpha*beta / p) / P
    res.dlogits.assign(static_cast<size_t>(T) * A, 0.0);
    for (int t = 0; t < T; ++t) {
        std::vector<double> log_occupancy(A, kNegInf);
        for (int s = 0; s < S; ++s) {
            const double ab = alpha[static_cast<size_t>(t) * S + s] +
                              beta[static_cast<size_t>(t) * S + s];
            if (ab == kNegInf) continue;
            log_occupancy[z[s]] = lse(log_occupancy[z[s]], ab);
        }
        for (int a = 0; a < A; ++a) {
            const double p = emissions.at(t, a);
            double occ = 0.0;
            if (log_occupancy[a] != kNegInf) {
                // alpha and beta both include the emission at t; divide one out.
                occ = std::exp(log_occupancy[a] - logp - lp[static_cast<size_t>(t) * A + a]);
            }
            res.dlogits[static_cast<size_t>(t) * A + a] = p - occ;
        }
    }
    return res;
}

GreedyResult greedy_decode(const EmissionMatrix& emissions) {
    emissions.validate();
    const int T = emissions.n_windows;
    const int A = emissions.alphabet_size;
    const int blank = A - 1;
    std::vector<int> path(T);
    for (int t = 0; t < T; ++t) {
        // Ascending scan with strictly-greater replacement: ties go to the
        // lower token index, and the blank (last index) loses every tie.
        int best = 0;
        for (int a = 1; a < A; ++a)
            if (emissions.at(t, a) > emissions.at(t, best)) best = a;
        path[t] = best;
    }
    GreedyResult out;
    int t = 0;
    while (t < T) {
        int run_end = t;
        while (run_end + 1 < T && path[run_end + 1] == path[t]) ++run_end;
        if (path[t] != blank) {
            double conf = 0.0;
            for (int u = t; u <= run_end; ++u) conf = std::max(conf, emissions.at(u, path[t]));
            out.tokens.push_back(path[t]);
            out.confidences.push_back(conf);
            out.spans.emplace_back(t, run_end);
        }
        t = run_end + 1;
    }
    return out;
}

BeamResult beam_decode(const EmissionMatrix& emissions, int beam_width) {
    emissions.validate();
    if (beam_width < 1) throw std::invalid_argument("beam_decode: beam width must be >= 1");
    const int T = emissions.n_windows;
    const int A = emissions.alphabet_size;
    const int blank = A - 1;
    const auto lp = log_probs(emissions);

    struct Mass {
        double blank_end = kNegInf;     // log prob of paths ending in blank
        double nonblank_end = kNegInf;  // log prob of paths ending in the last token
        double total() const { return lse(blank_end, nonblank_end); }
    };
    // std::map keys give deterministic (lexicographic) iteration for ties.
    std::map<std::vector<int>, Mass> beams;
    beams[{}] = Mass{0.0, kNegInf};

    for (int t = 0; t < T; ++t) {
        std::map<std::vector<int>, Mass> next;
        for (const auto& [prefix, mass] : beams) {
            const double total = mass.total();
            // blank keeps the prefix, terminating any run
            {
                auto& m = next[prefix];
                m.blank_end = lse(m.blank_end, total + lp[static_cast<size_t>(t) * A + blank]);
            }
            for (int c = 0; c < blank; ++c) {
                const double pc = lp[static_cast<size_t>(t) * A + c];
                if (pc == kNegInf) continue;
                if (!prefix.empty() && prefix.back() == c) {
                    // repeat: same collapsed prefix continues its run
                    {
                        auto& m = next[prefix];
                        m.nonblank_end = lse(m.nonblank_end, mass.nonblank_end + pc);
                    }
                    // a blank-separated repeat extends the sequence
                    std::vector<int> ext = prefix;
                    ext.push_back(c);
                    auto& m = next[ext];
                    m.nonblank_end = lse(m.nonblank_end, mass.blank_end + pc);
                } else {
                    std::vector<int> ext = prefix;
                    ext.push_back(c);
                    auto& m = next[ext];
                    m.nonblank_end = lse(m.nonblank_end, total + pc);
                }
            }
        }
        if (static_cast<int>(next.size()) > beam_width) {
            std::vector<std::pair<double, const std::vector<int>*>> ranked;
            ranked.reserve(next.size());
            for (const auto& [prefix, mass] : next) ranked.emplace_back(mass.total(), &prefix);
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });
            std::map<std::vector<int>, Mass> pruned;
            for (int i = 0; i < beam_width; ++i) pruned[*ranked[i].second] = next[*ranked[i].second];
            next = std::move(pruned);
        }
        beams = std::move(next);
    }

    // Pruning makes the accumulated masses underestimates, so rank the
    // surviving hypotheses by their exact sequence probability (forward
    // algorithm) and report that.
    BeamResult best;
    double best_score = kNegInf;
    for (const auto& [prefix, mass] : beams) {
        (void)mass;
        const auto fwd = ctc_forward(emissions, prefix);
        const double s = fwd.feasible ? -fwd.loss : kNegInf;
        if (s > best_score) {
            best_score = s;
            best.tokens = prefix;
        }
    }
    best.log_prob = best_score;
    return best;
}

double quality(double p_correct, double cap) {
    if (!(p_correct >= 0.0) || p_correct >= 1.0)
        throw std::domain_error("quality: P_C must be in [0, 1)");
    const double q = -10.0 * std::log10(1.0 - p_correct);
    return std::min(q, cap);
}

void write_emissions(const std::filesystem::path& path, const EmissionMatrix& m) {
    static_assert(std::endian::native == std::endian::little);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write("EMX1", 4);
    const uint32_t dims[2] = {static_cast<uint32_t>(m.n_windows),
                              static_cast<uint32_t>(m.alphabet_size)};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    for (double p : m.probs) {
        const float f = static_cast<float>(p);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
}

EmissionMatrix read_emissions(const std::filesystem::path& path) {
    static_assert(std::endian::native == std::endian::little);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open emissions file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "EMX1", 4) != 0)
        throw std::runtime_error(path.string() + ": bad emissions magic (want EMX1)");
    uint32_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    EmissionMatrix m = EmissionMatrix::zeros(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    for (auto& p : m.probs) {
        float f;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        p = f;
    }
    if (!in) throw std::runtime_error(path.string() + ": truncated emissions file");
    // float32 storage loses a little precision; restore the row-sum invariant
    m.normalize_rows();
    return m;
}

}  // namespace motifstore::ctc
