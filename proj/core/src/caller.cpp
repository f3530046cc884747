#include "motifstore/caller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "motifstore/sequence.hpp"

namespace motifstore::caller {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One grammar unit: a spacer followed by a slot motif (candidates over the
// whole library), or the trailing spacer alone. Templates are built with
// junction context so concatenated units reproduce the molecule's k-mer
// levels exactly.
struct UnitSpec {
    int fwd_spacer = 0;  // spacer index in forward block coordinates
    int fwd_slot = -1;   // slot in forward block coordinates; -1 = trailing spacer
    int spacer_rows = 0; // leading template rows that belong to the spacer
    std::vector<std::vector<float>> cand;  // per-motif template, or a single one
};

std::vector<UnitSpec> build_grammar(const TemplateBank& bank, const BlockLayout& layout,
                                    bool reverse) {
    const MotifLibrary& lib = bank.library;
    const int n = layout.total_slots();
    const int kappa = bank.pore.kmer_length;
    std::vector<UnitSpec> units;
    units.reserve(n + 1);
    if (!reverse) {
        for (int j = 0; j < n; ++j) {
            UnitSpec u;
            u.fwd_spacer = j;
            u.fwd_slot = j;
            u.spacer_rows = lib.spacer_length;
            const std::string next_ctx = lib.spacers[j + 1].substr(0, kappa - 1);
            for (int m = 0; m < lib.size(); ++m)
                u.cand.push_back(kmer_levels(lib.spacers[j] + lib.motifs[m] + next_ctx, bank.pore));
            units.push_back(std::move(u));
        }
        UnitSpec tail;
        tail.fwd_spacer = n;
        tail.fwd_slot = -1;
        tail.spacer_rows = lib.spacer_length - kappa + 1;
        tail.cand.push_back(kmer_levels(lib.spacers[n], bank.pore));
        units.push_back(std::move(tail));
    } else {
        // rc(molecule) = rc(S_n) rc(m_{n-1}) rc(S_{n-1}) ... rc(m_0) rc(S_0)
        for (int jp = 0; jp < n; ++jp) {
            const int j = n - 1 - jp;  // forward slot this unit decodes
            UnitSpec u;
            u.fwd_spacer = j + 1;
            u.fwd_slot = j;
            u.spacer_rows = lib.spacer_length;
            const std::string spacer_rc = complement_reverse(lib.spacers[j + 1]);
            const std::string next_ctx = complement_reverse(lib.spacers[j]).substr(0, kappa - 1);
            for (int m = 0; m < lib.size(); ++m)
                u.cand.push_back(
                    kmer_levels(spacer_rc + complement_reverse(lib.motifs[m]) + next_ctx, bank.pore));
            units.push_back(std::move(u));
        }
        UnitSpec tail;
        tail.fwd_spacer = 0;
        tail.fwd_slot = -1;
        tail.spacer_rows = lib.spacer_length - kappa + 1;
        tail.cand.push_back(kmer_levels(complement_reverse(lib.spacers[0]), bank.pore));
        units.push_back(std::move(tail));
    }
    return units;
}

struct DpResult {
    bool feasible = false;
    double cost = kInf;
    std::vector<int> unit_entry;  // entry event boundary per unit
    std::vector<int> unit_cand;   // chosen candidate per unit
};

struct Workspace {
    std::vector<double> B_prev, B_next, R;
    std::vector<int> E_prev, E_next, ER;
};

// Fixed-entry DTW of one template over events [entry, exit); returns the
// alignment cost, or +inf if the span cannot be matched.
double segment_cost(const std::vector<Event>& ev, int entry, int exit_,
                    const std::vector<float>& tmpl, double sigma, double stay_cost,
                    double skip_cost) {
    const int P = static_cast<int>(tmpl.size());
    const int W = exit_ - entry;
    std::vector<double> B(W + 1, kInf), Bn(W + 1, kInf), R(W + 1, kInf);
    B[0] = 0.0;
    for (int p = 0; p < P; ++p) {
        const double tau = tmpl[p];
        std::fill(R.begin(), R.end(), kInf);
        std::fill(Bn.begin(), Bn.end(), kInf);
        for (int w = 1; w <= W; ++w) {
            const double z = (ev[entry + w - 1].level - tau) / sigma;
            const double emit = 0.5 * z * z;
            const double from_new = B[w - 1];
            const double from_stay = R[w - 1] + stay_cost;
            R[w] = std::min(from_new, from_stay) + emit;
        }
        for (int w = 0; w <= W; ++w) Bn[w] = std::min(B[w] + skip_cost, R[w]);
        B.swap(Bn);
    }
    return B[W];
}

// Semi-Markov pass over all units; tracks per-unit entry boundaries for
// segmentation. Banded on the cumulative expected-window coordinate.
DpResult grammar_dp(const std::vector<Event>& ev, const std::vector<UnitSpec>& units,
                    const CallerParams& prm, Workspace& ws) {
    const int E = static_cast<int>(ev.size());
    const double sigma = std::max(prm.sigma_floor, prm.noise_std);

    std::vector<double> cum(E + 1, 0.0);
    for (int e = 0; e < E; ++e) cum[e + 1] = cum[e] + ev[e].support;
    const double dwell = std::max(1.0, prm.dwell_mean);
    // first event boundary whose expected window index is >= w
    auto lower_boundary = [&](double w) {
        return static_cast<int>(std::lower_bound(cum.begin(), cum.end(), w * dwell) - cum.begin());
    };

    std::vector<double> D(E + 1, kInf);
    std::vector<int> D_entry(E + 1, 0);
    D[0] = 0.0;

    const int n_units = static_cast<int>(units.size());
    std::vector<std::vector<int>> back_cand(n_units, std::vector<int>(E + 1, -1));
    std::vector<std::vector<int>> back_entry(n_units, std::vector<int>(E + 1, -1));

    ws.B_prev.assign(E + 1, kInf);
    ws.B_next.assign(E + 1, kInf);
    ws.R.assign(E + 1, kInf);
    ws.E_prev.assign(E + 1, -1);
    ws.E_next.assign(E + 1, -1);
    ws.ER.assign(E + 1, -1);

    double window_base = 0.0;
    for (int j = 0; j < n_units; ++j) {
        const UnitSpec& unit = units[j];
        const int P = static_cast<int>(unit.cand[0].size());
        std::vector<double> best(E + 1, kInf);
        std::vector<int> best_cand(E + 1, -1), best_entry(E + 1, -1);

        for (size_t m = 0; m < unit.cand.size(); ++m) {
            const std::vector<float>& tmpl = unit.cand[m];
            auto& B = ws.B_prev;
            auto& Bn = ws.B_next;
            auto& R = ws.R;
            auto& EB = ws.E_prev;
            auto& EBn = ws.E_next;
            auto& ER = ws.ER;
            std::copy(D.begin(), D.end(), B.begin());
            for (int e = 0; e <= E; ++e) EB[e] = e;

            int prev_lo = 0;
            for (int p = 0; p < P; ++p) {
                const double g = window_base + p;
                const double band = std::max(prm.warp_band_frac * P, prm.warp_band_frac * g);
                int lo = lower_boundary(g - band);
                int hi = lower_boundary(g + 1.0 + band);
                if (hi > E) hi = E;
                if (lo > hi) {
                    prev_lo = lo;
                    std::fill(Bn.begin(), Bn.end(), kInf);
                    B.swap(Bn);
                    continue;
                }
                const double tau = tmpl[p];
                const int run_lo = std::max(1, std::min(lo, prev_lo));
                const int run_hi = hi;
                std::fill(R.begin() + run_lo - 1, R.begin() + run_hi + 1, kInf);
                for (int e = run_lo; e <= run_hi; ++e) {
                    const double z = (ev[e - 1].level - tau) / sigma;
                    const double emit = 0.5 * z * z;
                    const double from_new = B[e - 1];
                    const double from_stay = R[e - 1] + prm.stay_cost;
                    if (from_new <= from_stay) {
                        R[e] = from_new + emit;
                        ER[e] = EB[e - 1];
                    } else {
                        R[e] = from_stay + emit;
                        ER[e] = ER[e - 1];
                    }
                }
                std::fill(Bn.begin(), Bn.end(), kInf);
                const int out_lo = std::min(run_lo - 1, lo);
                for (int e = out_lo; e <= run_hi; ++e) {
                    const double via_skip = B[e] + prm.skip_cost;
                    const double via_run = e >= run_lo ? R[e] : kInf;
                    if (via_skip <= via_run) {
                        Bn[e] = via_skip;
                        EBn[e] = EB[e];
                    } else {
                        Bn[e] = via_run;
                        EBn[e] = ER[e];
                    }
                }
                B.swap(Bn);
                EB.swap(EBn);
                prev_lo = out_lo;
            }
            for (int e = 0; e <= E; ++e) {
                if (B[e] < best[e]) {
                    best[e] = B[e];
                    best_cand[e] = static_cast<int>(m);
                    best_entry[e] = EB[e];
                }
            }
        }
        D.swap(best);
        back_cand[j] = std::move(best_cand);
        back_entry[j] = std::move(best_entry);
        window_base += P;
    }

    DpResult res;
    if (D[E] == kInf) return res;
    res.feasible = true;
    res.cost = D[E];
    res.unit_entry.assign(n_units, 0);
    res.unit_cand.assign(n_units, -1);
    int e = E;
    for (int j = n_units - 1; j >= 0; --j) {
        res.unit_cand[j] = back_cand[j][e];
        res.unit_entry[j] = back_entry[j][e];
        e = res.unit_entry[j];
    }
    return res;
}

struct ScoredClass {
    int best = -1;
    double margin = 0.0;          // runner-up cost minus best cost
    std::vector<double> costs;    // per candidate
};

ScoredClass score_candidates(const std::vector<Event>& ev, int entry, int exit_,
                             const std::vector<std::vector<float>>& templates, double sigma,
                             const CallerParams& prm) {
    ScoredClass sc;
    sc.costs.resize(templates.size(), kInf);
    double best = kInf, second = kInf;
    for (size_t i = 0; i < templates.size(); ++i) {
        const double c =
            segment_cost(ev, entry, exit_, templates[i], sigma, prm.stay_cost, prm.skip_cost);
        sc.costs[i] = c;
        if (c < best) {
            second = best;
            best = c;
            sc.best = static_cast<int>(i);
        } else if (c < second) {
            second = c;
        }
    }
    sc.margin = templates.size() > 1 && second < kInf ? second - best : 1e9;
    return sc;
}

}  // namespace

double CallerParams::effective_eventize_penalty() const {
    if (eventize_penalty >= 0) return eventize_penalty;
    return std::max(1e-3, 15.0 * noise_std * noise_std);
}

TemplateBank build_template_bank(const MotifLibrary& lib, const PoreModel& pore) {
    lib.validate();
    pore.validate();
    if (lib.motif_length < pore.kmer_length || lib.spacer_length < pore.kmer_length)
        throw std::invalid_argument("build_template_bank: sequences shorter than pore kmer");
    TemplateBank bank;
    bank.library = lib;
    bank.pore = pore;
    for (const auto& m : lib.motifs) bank.motif_templates.push_back(kmer_levels(m, pore));
    for (const auto& s : lib.spacers) bank.spacer_templates.push_back(kmer_levels(s, pore));
    return bank;
}

CallResult viterbi_call(const EventSequence& events, const TemplateBank& bank,
                        const BlockLayout& layout, const CallerParams& params) {
    layout.validate();
    if (bank.library.n_spacers() < layout.n_spacers())
        throw std::invalid_argument("viterbi_call: bank has too few spacers for layout");
    const int M = bank.library.size();
    const int n = layout.total_slots();
    const ctc::TokenAlphabet alphabet{M, layout.n_spacers()};
    const double sigma = std::max(params.sigma_floor, params.noise_std);

    CallResult result;
    if (events.empty()) {
        result.mappable = false;
        result.call.status = "unmappable";
        return result;
    }

    Workspace ws;
    const auto fwd_units = build_grammar(bank, layout, false);
    const auto rev_units = build_grammar(bank, layout, true);
    const DpResult fwd = grammar_dp(events, fwd_units, params, ws);
    const DpResult rev = grammar_dp(events, rev_units, params, ws);

    if (!fwd.feasible && !rev.feasible) {
        result.mappable = false;
        result.call.status = "unmappable";
        return result;
    }
    const bool use_rev = rev.feasible && (!fwd.feasible || rev.cost < fwd.cost);
    const DpResult& path = use_rev ? rev : fwd;
    const auto& units = use_rev ? rev_units : fwd_units;
    result.call.reverse = use_rev;
    result.path_cost = path.cost;

    // grammar rows in forward coordinates: spacer 0, slot 0, ..., spacer n
    const int n_rows = 2 * n + 1;
    result.emissions = ctc::EmissionMatrix::zeros(n_rows, alphabet.size());
    std::vector<TokenCall> row_tokens(n_rows);

    std::vector<std::vector<float>> oriented_spacers;
    for (int s = 0; s < layout.n_spacers(); ++s) {
        if (use_rev)
            oriented_spacers.push_back(
                kmer_levels(complement_reverse(bank.library.spacers[s]), bank.pore));
        else
            oriented_spacers.push_back(bank.spacer_templates[s]);
    }

    const int E = static_cast<int>(events.size());
    const int n_units = static_cast<int>(units.size());
    for (int j = 0; j < n_units; ++j) {
        const UnitSpec& unit = units[j];
        const int entry = path.unit_entry[j];
        const int exit_ = j + 1 < n_units ? path.unit_entry[j + 1] : E;

        // support-proportional spacer/motif split of the unit's span
        int split = exit_;
        if (unit.fwd_slot >= 0) {
            const int P = static_cast<int>(unit.cand[0].size());
            const double frac = static_cast<double>(unit.spacer_rows) / P;
            double span_support = 0.0;
            for (int e = entry; e < exit_; ++e) span_support += events[e].support;
            double acc = 0.0;
            split = entry;
            while (split < exit_ && acc + events[split].support <= frac * span_support + 1e-9)
                acc += events[split++].support;
        }

        // spacer row: normalized likelihoods of every position-specific
        // spacer over the spacer span
        {
            const int spacer_exit = unit.fwd_slot >= 0 ? split : exit_;
            const auto sc =
                score_candidates(events, entry, spacer_exit, oriented_spacers, sigma, params);
            const int row = 2 * unit.fwd_spacer;
            const int called = alphabet.spacer_token(unit.fwd_spacer);
            const double gap = sc.best == unit.fwd_spacer
                                   ? sc.margin
                                   : sc.costs[sc.best] - sc.costs[unit.fwd_spacer];
            const double p_c =
                std::clamp(logistic(gap / params.confidence_scale), 1e-12, 1.0 - 1e-9);
            row_tokens[row] = {-1, called, p_c, ctc::quality(p_c, params.quality_cap)};
            for (int s = 0; s < layout.n_spacers(); ++s)
                result.emissions.at(row, alphabet.spacer_token(s)) =
                    std::exp(-(sc.costs[s] - sc.costs[sc.best]) / params.confidence_scale);
        }

        // slot row: normalized likelihoods of every motif over the unit span
        if (unit.fwd_slot >= 0) {
            const auto sc = score_candidates(events, entry, exit_, unit.cand, sigma, params);
            const int row = 2 * unit.fwd_slot + 1;
            const int called = path.unit_cand[j];
            const double gap =
                sc.best == called ? sc.margin : sc.costs[sc.best] - sc.costs[called];
            const double p_c =
                std::clamp(logistic(gap / params.confidence_scale), 1e-12, 1.0 - 1e-9);
            row_tokens[row] = {unit.fwd_slot, alphabet.motif_token(called), p_c,
                               ctc::quality(p_c, params.quality_cap)};
            for (int m = 0; m < M; ++m)
                result.emissions.at(row, alphabet.motif_token(m)) =
                    std::exp(-(sc.costs[m] - sc.costs[sc.best]) / params.confidence_scale);
        }
    }

    // floor + normalize rows so downstream CTC decoders can consume them
    for (int r = 0; r < n_rows; ++r)
        for (int a = 0; a < alphabet.size(); ++a)
            if (result.emissions.at(r, a) <= 0) result.emissions.at(r, a) = 1e-12;
    result.emissions.normalize_rows();

    result.call.tokens = std::move(row_tokens);
    double q_sum = 0.0;
    int q_n = 0;
    for (const auto& t : result.call.tokens) {
        if (t.slot >= 0) {
            q_sum += t.q;
            ++q_n;
        }
    }
    result.call.read_q = q_n > 0 ? q_sum / q_n : -1.0;
    result.call.status = "retained";
    return result;
}

ReadCall filter_call(const ReadCall& call, double read_q_min, double token_p_min,
                     double quality_cap) {
    ReadCall out = call;
    if (out.status == "unmappable") return out;
    bool any_confident = false;
    for (const auto& t : call.tokens) any_confident |= t.p_c >= 0;
    if (!any_confident) return out;  // baseline pipelines pass through

    out.tokens.clear();
    for (const auto& t : call.tokens)
        if (t.p_c < 0 || t.p_c >= token_p_min) out.tokens.push_back(t);

    // read-level quality = mean quality of the surviving slot calls;
    // structural spacer detections stay out of the average
    double q_sum = 0.0;
    int q_n = 0;
    for (const auto& t : out.tokens) {
        if (t.slot >= 0 && t.p_c >= 0) {
            q_sum += std::min(t.q, quality_cap);
            ++q_n;
        }
    }
    out.read_q = q_n > 0 ? q_sum / q_n : -1.0;
    if (q_n == 0 || out.read_q < read_q_min) out.status = "rejected";
    else out.status = "retained";
    return out;
}

std::vector<BootstrapRead> label_bootstrap(std::vector<BootstrapRead> reads, double top_fraction) {
    if (top_fraction < 0.0 || top_fraction > 1.0)
        throw std::invalid_argument("label_bootstrap: fraction outside [0,1]");
    std::sort(reads.begin(), reads.end(), [](const BootstrapRead& a, const BootstrapRead& b) {
        if (a.match_fraction != b.match_fraction) return a.match_fraction > b.match_fraction;
        return a.read_id < b.read_id;
    });
    const size_t keep =
        static_cast<size_t>(std::floor(static_cast<double>(reads.size()) * top_fraction + 1e-9));
    reads.resize(std::min(keep, reads.size()));
    return reads;
}

}  // namespace motifstore::caller
