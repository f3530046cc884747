#include "motifstore/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "motifstore/sequence.hpp"

namespace motifstore::search {

namespace {

constexpr int kZePosTol = 10;  // residual tolerance for anchor arithmetic

struct Occurrence {
    int pattern = 0;  // motif id or spacer position
    long pos = 0;
};

// All exact occurrences of the library motifs and spacers, via a rolling
// polynomial hash per pattern length with verification on hit.
struct ExactMatcher {
    const MotifLibrary* lib;
    std::unordered_map<uint64_t, std::vector<int>> motif_by_hash;
    std::unordered_map<uint64_t, std::vector<int>> spacer_by_hash;
    uint64_t pow_l = 1, pow_ls = 1;

    static constexpr uint64_t kMul = 0x9E3779B97F4A7C15ULL;

    static uint64_t hash_of(std::string_view s) {
        uint64_t h = 0;
        for (char c : s) h = h * kMul + static_cast<uint64_t>(c);
        return h;
    }
    static uint64_t pow_mul(size_t n) {
        uint64_t p = 1;
        for (size_t i = 0; i < n; ++i) p *= kMul;
        return p;
    }

    explicit ExactMatcher(const MotifLibrary& library) : lib(&library) {
        for (int m = 0; m < lib->size(); ++m) motif_by_hash[hash_of(lib->motifs[m])].push_back(m);
        for (int s = 0; s < lib->n_spacers(); ++s)
            spacer_by_hash[hash_of(lib->spacers[s])].push_back(s);
        pow_l = pow_mul(lib->motif_length);
        pow_ls = pow_mul(lib->spacer_length);
    }

    void scan(std::string_view text, std::vector<Occurrence>& motif_occ,
              std::vector<Occurrence>& spacer_occ) const {
        scan_length(text, lib->motif_length, pow_l, motif_by_hash,
                    [&](int id, long pos) { return lib->motifs[id] == text.substr(pos, lib->motif_length); },
                    motif_occ);
        scan_length(text, lib->spacer_length, pow_ls, spacer_by_hash,
                    [&](int id, long pos) { return lib->spacers[id] == text.substr(pos, lib->spacer_length); },
                    spacer_occ);
    }

private:
    template <typename Verify>
    static void scan_length(std::string_view text, int len, uint64_t pow_len,
                            const std::unordered_map<uint64_t, std::vector<int>>& table,
                            Verify verify, std::vector<Occurrence>& out) {
        if (static_cast<long>(text.size()) < len) return;
        uint64_t h = 0;
        for (int i = 0; i < len; ++i) h = h * kMul + static_cast<uint64_t>(text[i]);
        for (long pos = 0;; ++pos) {
            auto it = table.find(h);
            if (it != table.end())
                for (int id : it->second)
                    if (verify(id, pos)) out.push_back({id, pos});
            if (pos + len >= static_cast<long>(text.size())) break;
            h = h * kMul + static_cast<uint64_t>(text[pos + len]) -
                pow_len * static_cast<uint64_t>(text[pos]);
        }
    }
};

// Slot proposal from one anchor: the number of whole (motif+spacer) units
// between the anchor and the motif occurrence, accepted when the residual is
// small.
struct SlotProposal {
    bool valid = false;
    int slot = -1;
    long residual = 0;
};

SlotProposal propose_from_left(const std::vector<Occurrence>& spacer_occ, long p, int l, int l_s,
                               int total_slots) {
    SlotProposal best;
    long best_anchor_end = std::numeric_limits<long>::min();
    for (const auto& [j, o] : spacer_occ) {
        const long anchor_end = o + l_s;
        if (anchor_end > p) continue;
        if (anchor_end < best_anchor_end) continue;
        const long gap = p - anchor_end;
        const long steps = (gap + (l + l_s) / 2) / (l + l_s);
        const long resid = std::llabs(gap - steps * (l + l_s));
        const long slot = j + steps;
        if (resid <= kZePosTol && slot >= 0 && slot < total_slots) {
            if (anchor_end > best_anchor_end || (anchor_end == best_anchor_end && resid < best.residual)) {
                best = {true, static_cast<int>(slot), resid};
                best_anchor_end = anchor_end;
            }
        }
    }
    return best;
}

SlotProposal propose_from_right(const std::vector<Occurrence>& spacer_occ, long p, int l, int l_s,
                                int total_slots) {
    SlotProposal best;
    long best_anchor = std::numeric_limits<long>::max();
    for (const auto& [j, o] : spacer_occ) {
        if (o < p + l) continue;
        if (o > best_anchor) continue;
        const long gap = o - (p + l);
        const long steps = (gap + (l + l_s) / 2) / (l + l_s);
        const long resid = std::llabs(gap - steps * (l + l_s));
        const long slot = j - 1 - steps;
        if (resid <= kZePosTol && slot >= 0 && slot < total_slots) {
            if (o < best_anchor || (o == best_anchor && resid < best.residual)) {
                best = {true, static_cast<int>(slot), resid};
                best_anchor = o;
            }
        }
    }
    return best;
}

struct SlotCandidate {
    int motif = -1;
    long pos = 0;
    int support = 0;  // flanks agreeing
    long residual = 0;
};

ReadCall finish_call(const sim::Read& read, bool reverse,
                     const std::map<int, SlotCandidate>& per_slot) {
    ReadCall call;
    call.read_id = read.read_id;
    call.block_id = read.block_id;
    call.reverse = reverse;
    for (const auto& [slot, cand] : per_slot)
        call.tokens.push_back(TokenCall{slot, cand.motif, -1.0, -1.0});
    return call;
}

}  // namespace

size_t SpacerIndex::n_postings() const {
    size_t n = 0;
    for (const auto& [h, v] : postings) n += v.size();
    return n;
}

SpacerIndex build_spacer_index(const MotifLibrary& lib, int k_idx) {
    if (k_idx < 1 || k_idx > 32) throw std::invalid_argument("build_spacer_index: k_idx out of range");
    if (k_idx > lib.spacer_length)
        throw std::invalid_argument("build_spacer_index: k_idx exceeds spacer length");
    SpacerIndex index;
    index.k_idx = k_idx;
    for (int s = 0; s < lib.n_spacers(); ++s) {
        const std::string& sp = lib.spacers[s];
        for (int off = 0; off + k_idx <= static_cast<int>(sp.size()); ++off)
            index.postings[pack_kmer(sp, off, k_idx)].push_back({s, off});
    }
    return index;
}

ReadCall ze_search(const sim::Read& read, const MotifLibrary& lib, const BlockLayout& layout) {
    layout.validate();
    const ExactMatcher matcher(lib);
    const int l = lib.motif_length, l_s = lib.spacer_length;

    std::vector<Occurrence> motif_occ[2], spacer_occ[2];
    const std::string rc = complement_reverse(read.bases);
    matcher.scan(read.bases, motif_occ[0], spacer_occ[0]);
    matcher.scan(rc, motif_occ[1], spacer_occ[1]);
    const int orient = spacer_occ[1].size() > spacer_occ[0].size() ? 1 : 0;

    std::map<int, SlotCandidate> per_slot;
    for (const auto& [m, p] : motif_occ[orient]) {
        const auto left = propose_from_left(spacer_occ[orient], p, l, l_s, layout.total_slots());
        const auto right = propose_from_right(spacer_occ[orient], p, l, l_s, layout.total_slots());
        SlotCandidate cand;
        cand.motif = m;
        cand.pos = p;
        if (left.valid && right.valid && left.slot == right.slot) {
            cand.support = 2;
            cand.residual = std::min(left.residual, right.residual);
        } else if (left.valid && right.valid) {
            const auto& pick = left.residual <= right.residual ? left : right;
            cand.support = 1;
            cand.residual = pick.residual;
        } else if (left.valid || right.valid) {
            const auto& pick = left.valid ? left : right;
            cand.support = 1;
            cand.residual = pick.residual;
        } else {
            continue;
        }
        const int slot = left.valid && right.valid && left.slot != right.slot
                             ? (left.residual <= right.residual ? left.slot : right.slot)
                             : (left.valid ? left.slot : right.slot);
        auto it = per_slot.find(slot);
        if (it == per_slot.end()) {
            per_slot[slot] = cand;
        } else {
            SlotCandidate& cur = it->second;
            const bool better = cand.support > cur.support ||
                                (cand.support == cur.support &&
                                 (cand.residual < cur.residual ||
                                  (cand.residual == cur.residual &&
                                   (cand.pos < cur.pos ||
                                    (cand.pos == cur.pos && cand.motif < cur.motif)))));
            if (better) cur = cand;
        }
    }
    return finish_call(read, orient == 1, per_slot);
}

namespace {

struct MergedCandidate {
    int spacer = 0;
    long offset = 0;  // refined estimated spacer start in the oriented read
    int support = 0;
};

struct ChainSegmentCall {
    int slot = -1;
    int motif = -1;
    int score = 0;
};

struct Chain {
    std::vector<int> cand_idx;
    long begin = 0, end = 0;
    int mapping_score = 0;
    std::vector<ChainSegmentCall> calls;
};

// Steps (1)-(4): seed, filter, merge, refine.
std::vector<MergedCandidate> spacer_candidates(std::string_view text, const SpacerIndex& index,
                                               const MotifLibrary& lib, const SearchParams& prm) {
    const int k = index.k_idx;
    const int l_s = lib.spacer_length;
    // raw support per (spacer, implied start)
    std::map<std::pair<int, long>, int> raw;
    if (static_cast<int>(text.size()) >= k) {
        for (long r = 0; r + k <= static_cast<long>(text.size()); ++r) {
            const auto it = index.postings.find(pack_kmer(text, r, k));
            if (it == index.postings.end()) continue;
            for (const auto& post : it->second) {
                const long start = r - post.offset;
                if (start <= -l_s || start >= static_cast<long>(text.size())) continue;
                ++raw[{post.spacer, start}];
            }
        }
    }
    // filter weak candidates, then merge nearby ones per spacer
    std::vector<MergedCandidate> merged;
    auto it = raw.begin();
    while (it != raw.end()) {
        const int spacer = it->first.first;
        // cluster greedily over consecutive starts within merge_window
        std::vector<std::pair<long, int>> cluster;
        long last_start = std::numeric_limits<long>::min();
        while (it != raw.end() && it->first.first == spacer) {
            const long start = it->first.second;
            const int support = it->second;
            if (support >= prm.min_support) {
                if (!cluster.empty() && start - last_start > prm.merge_window) {
                    merged.push_back({spacer, 0, 0});
                    auto& mc = merged.back();
                    long wsum = 0;
                    for (const auto& [s, c] : cluster) {
                        wsum += s * c;
                        mc.support += c;
                    }
                    mc.offset = wsum / mc.support;
                    cluster.clear();
                }
                cluster.emplace_back(start, support);
                last_start = start;
            }
            ++it;
        }
        if (!cluster.empty()) {
            merged.push_back({spacer, 0, 0});
            auto& mc = merged.back();
            long wsum = 0;
            for (const auto& [s, c] : cluster) {
                wsum += s * c;
                mc.support += c;
            }
            mc.offset = wsum / mc.support;
        }
    }
    // refine offsets by local Hamming scan
    for (auto& mc : merged) {
        int best_d = std::numeric_limits<int>::max();
        long best_off = mc.offset;
        for (int shift = -prm.refine_window; shift <= prm.refine_window; ++shift) {
            const long off = mc.offset + shift;
            const int d = anchored_hamming(text, off, lib.spacers[mc.spacer]);
            if (d < best_d) {
                best_d = d;
                best_off = off;
            }
        }
        mc.offset = best_off;
    }
    return merged;
}

// Steps (5)-(7): chain, align segments, retain best chain per overlap group.
std::vector<Chain> build_chains(std::string_view text, std::vector<MergedCandidate>& cands,
                                const MotifLibrary& lib, const SearchParams& prm) {
    const int l = lib.motif_length, l_s = lib.spacer_length;
    std::sort(cands.begin(), cands.end(), [](const MergedCandidate& a, const MergedCandidate& b) {
        return a.spacer != b.spacer ? a.spacer < b.spacer : a.offset < b.offset;
    });
    const int n = static_cast<int>(cands.size());
    std::vector<int> best_pred(n, -1), chain_support(n);
    std::vector<bool> is_pred(n, false);
    for (int i = 0; i < n; ++i) {
        chain_support[i] = cands[i].support;
        for (int j = 0; j < n; ++j) {
            if (cands[j].spacer != cands[i].spacer - 1) continue;
            const long gap = cands[i].offset - (cands[j].offset + l_s);
            if (std::llabs(gap - l) > prm.indel_tol) continue;
            if (chain_support[j] + cands[i].support > chain_support[i]) {
                chain_support[i] = chain_support[j] + cands[i].support;
                best_pred[i] = j;
            }
        }
        if (best_pred[i] >= 0) is_pred[best_pred[i]] = true;
    }

    std::vector<Chain> chains;
    for (int i = 0; i < n; ++i) {
        if (is_pred[i]) continue;  // not a chain tail
        Chain ch;
        for (int cur = i; cur >= 0; cur = best_pred[cur]) ch.cand_idx.push_back(cur);
        std::reverse(ch.cand_idx.begin(), ch.cand_idx.end());
        ch.begin = cands[ch.cand_idx.front()].offset;
        ch.end = cands[ch.cand_idx.back()].offset + l_s;
        // align every between-spacer segment to the motif library
        for (size_t u = 0; u + 1 < ch.cand_idx.size(); ++u) {
            const auto& a = cands[ch.cand_idx[u]];
            const auto& b = cands[ch.cand_idx[u + 1]];
            const long seg_lo = std::max<long>(0, a.offset + l_s);
            const long seg_hi = std::min<long>(static_cast<long>(text.size()), b.offset);
            if (seg_hi <= seg_lo) continue;
            const std::string_view seg = text.substr(seg_lo, seg_hi - seg_lo);
            int d1 = std::numeric_limits<int>::max(), d2 = d1, arg = -1;
            for (int m = 0; m < lib.size(); ++m) {
                const int d = banded_edit_distance(seg, lib.motifs[m], 2 * prm.indel_tol);
                if (d < d1) {
                    d2 = d1;
                    d1 = d;
                    arg = m;
                } else if (d < d2) {
                    d2 = d;
                }
            }
            ChainSegmentCall call;
            call.slot = a.spacer;  // slot between spacers a.spacer and a.spacer+1
            call.score = std::max(0, l - d1);
            call.motif = (d2 - d1 >= prm.margin_min) ? arg : -1;
            ch.calls.push_back(call);
            ch.mapping_score += call.score;
        }
        chains.push_back(std::move(ch));
    }

    // group overlapping chains, retain the best mapping score in each group
    std::sort(chains.begin(), chains.end(), [](const Chain& a, const Chain& b) {
        return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
    });
    std::vector<Chain> retained;
    size_t i = 0;
    while (i < chains.size()) {
        size_t best = i, j = i;
        long group_end = chains[i].end;
        while (j < chains.size() && chains[j].begin < group_end) {
            group_end = std::max(group_end, chains[j].end);
            const bool better =
                chains[j].mapping_score > chains[best].mapping_score ||
                (chains[j].mapping_score == chains[best].mapping_score &&
                 (chains[j].cand_idx.size() > chains[best].cand_idx.size() ||
                  (chains[j].cand_idx.size() == chains[best].cand_idx.size() &&
                   chains[j].begin < chains[best].begin)));
            if (better) best = j;
            ++j;
        }
        retained.push_back(chains[best]);
        i = j;
    }
    return retained;
}

struct OrientedResult {
    std::map<int, std::pair<int, int>> slot_calls;  // slot -> (motif, score)
    int total_score = 0;
};

OrientedResult am_one_orientation(std::string_view text, const SpacerIndex& index,
                                  const MotifLibrary& lib, const BlockLayout& layout,
                                  const SearchParams& prm) {
    OrientedResult res;
    auto cands = spacer_candidates(text, index, lib, prm);
    const auto chains = build_chains(text, cands, lib, prm);
    for (const auto& ch : chains) {
        res.total_score += ch.mapping_score;
        for (const auto& call : ch.calls) {
            if (call.motif < 0 || call.slot < 0 || call.slot >= layout.total_slots()) continue;
            auto it = res.slot_calls.find(call.slot);
            if (it == res.slot_calls.end() || call.score > it->second.second ||
                (call.score == it->second.second && call.motif < it->second.first))
                res.slot_calls[call.slot] = {call.motif, call.score};
        }
    }
    return res;
}

}  // namespace

ReadCall am_search(const sim::Read& read, const SpacerIndex& index, const MotifLibrary& lib,
                   const BlockLayout& layout, const SearchParams& params) {
    layout.validate();
    const std::string rc = complement_reverse(read.bases);
    const OrientedResult fwd = am_one_orientation(read.bases, index, lib, layout, params);
    const OrientedResult rev = am_one_orientation(rc, index, lib, layout, params);
    const bool use_rev = rev.total_score > fwd.total_score;
    const OrientedResult& pick = use_rev ? rev : fwd;

    ReadCall call;
    call.read_id = read.read_id;
    call.block_id = read.block_id;
    call.reverse = use_rev;
    for (const auto& [slot, mv] : pick.slot_calls)
        call.tokens.push_back(TokenCall{slot, mv.first, -1.0, -1.0});
    return call;
}

ReadScore score_read_vs_truth(const ReadCall& call, const Block& truth, const BlockLayout& layout) {
    ReadScore score;
    int called = 0, correct = 0, wrong = 0;
    for (int s = layout.n_address_slots; s < layout.total_slots(); ++s) {
        const auto m = call.slot_motif(s);
        if (!m) continue;
        ++called;
        if (truth.payloads[s - layout.n_address_slots].contains(*m)) ++correct;
        else ++wrong;
    }
    score.detected = static_cast<double>(correct) / layout.n_payload_slots;
    score.no_calls = called == 0;
    score.error = called == 0 ? 0.0 : static_cast<double>(wrong) / called;
    return score;
}

ReadScore score_read_vs_slot_motifs(const ReadCall& call, const std::vector<int>& slot_motifs,
                                    const BlockLayout& layout) {
    ReadScore score;
    int called = 0, correct = 0, wrong = 0;
    for (int s = layout.n_address_slots; s < layout.total_slots(); ++s) {
        const auto m = call.slot_motif(s);
        if (!m) continue;
        ++called;
        if (s < static_cast<int>(slot_motifs.size()) && slot_motifs[s] == *m) ++correct;
        else ++wrong;
    }
    score.detected = static_cast<double>(correct) / layout.n_payload_slots;
    score.no_calls = called == 0;
    score.error = called == 0 ? 0.0 : static_cast<double>(wrong) / called;
    return score;
}

}  // namespace motifstore::search
