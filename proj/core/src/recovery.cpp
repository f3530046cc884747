#include "motifstore/recovery.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "motifstore/search.hpp"

namespace motifstore::recovery {

VoteTable VoteTable::for_layout(int64_t block_id, const BlockLayout& layout) {
    VoteTable t;
    t.block_id = block_id;
    t.slot_votes.resize(layout.total_slots());
    return t;
}

void VoteTable::merge(const VoteTable& other) {
    if (other.block_id != block_id || other.slot_votes.size() != slot_votes.size())
        throw std::invalid_argument("VoteTable::merge: table mismatch");
    reads_seen += other.reads_seen;
    for (size_t s = 0; s < slot_votes.size(); ++s)
        for (const auto& [motif, count] : other.slot_votes[s]) slot_votes[s][motif] += count;
}

void vote_update(VoteTable& table, const ReadCall& calls) {
    if (calls.block_id != table.block_id)
        throw std::invalid_argument("vote_update: calls belong to a different block");
    ++table.reads_seen;
    for (const auto& t : calls.tokens)
        if (t.slot >= 0 && t.slot < static_cast<int>(table.slot_votes.size()))
            ++table.slot_votes[t.slot][t.token];
}

std::vector<SlotDecision> block_decision(const VoteTable& table, const BlockLayout& layout) {
    std::vector<SlotDecision> decisions(layout.total_slots());
    for (int s = 0; s < layout.total_slots(); ++s) {
        const auto& votes = table.slot_votes[s];
        const bool is_address = s < layout.n_address_slots;
        const int want = is_address ? 1 : layout.motifs_per_symbol;
        if (static_cast<int>(votes.size()) < want) continue;  // undecided
        // (count desc, id asc); map iteration gives ids ascending already
        std::vector<std::pair<int, int>> ranked;  // (motif, count)
        ranked.reserve(votes.size());
        for (const auto& [motif, count] : votes) ranked.emplace_back(motif, count);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        SlotDecision& d = decisions[s];
        d.decided = true;
        for (int i = 0; i < want; ++i) d.motifs.push_back(ranked[i].first);
        std::sort(d.motifs.begin(), d.motifs.end());
    }
    return decisions;
}

namespace {

bool payload_slot_correct(const SlotDecision& d, const CompositeSymbol& truth) {
    return d.decided && d.motifs == truth.ids;
}

struct GroupedCalls {
    std::vector<int64_t> block_ids;  // in first-appearance order
    std::unordered_map<int64_t, std::vector<const ReadCall*>> by_block;
};

GroupedCalls group_retained(const std::vector<ReadCall>& calls) {
    GroupedCalls g;
    for (const auto& c : calls) {
        if (c.status != "retained") continue;
        auto [it, fresh] = g.by_block.try_emplace(c.block_id);
        if (fresh) g.block_ids.push_back(c.block_id);
        it->second.push_back(&c);
    }
    return g;
}

}  // namespace

RecoveryReport recovery_curve(const std::vector<ReadCall>& calls,
                              const std::vector<Block>& truth_blocks, const BlockLayout& layout,
                              double threshold) {
    layout.validate();
    RecoveryReport report;
    report.threshold = threshold;

    std::unordered_map<int64_t, const Block*> truth;
    for (const auto& b : truth_blocks) truth[b.block_id] = &b;

    // per-read means over retained calls
    {
        size_t retained = 0;
        double det_sum = 0.0, err_sum = 0.0;
        for (const auto& c : calls) {
            if (c.status != "retained") continue;
            const auto it = truth.find(c.block_id);
            if (it == truth.end()) continue;
            const auto score = search::score_read_vs_truth(c, *it->second, layout);
            det_sum += score.detected;
            err_sum += score.error;
            ++retained;
        }
        report.detected_mean = retained ? det_sum / retained : 0.0;
        report.error_mean = retained ? err_sum / retained : 0.0;
        report.retained_fraction = calls.empty() ? 1.0 : static_cast<double>(retained) / calls.size();
    }

    const GroupedCalls grouped = group_retained(calls);
    const size_t n_blocks = truth_blocks.size();
    if (n_blocks == 0) return report;
    const int n_payload = layout.n_payload_slots;
    const size_t total_pairs = n_blocks * static_cast<size_t>(n_payload);

    std::unordered_map<int64_t, VoteTable> tables;
    std::unordered_map<int64_t, int> correct_slots;
    for (const auto& b : truth_blocks) {
        tables.emplace(b.block_id, VoteTable::for_layout(b.block_id, layout));
        correct_slots[b.block_id] = 0;
    }

    size_t max_reads = 0;
    for (const auto& [id, v] : grouped.by_block) max_reads = std::max(max_reads, v.size());

    size_t correct_total = 0;
    size_t consumed_total = 0;
    for (size_t n = 1; n <= max_reads; ++n) {
        for (const auto& b : truth_blocks) {
            const auto it = grouped.by_block.find(b.block_id);
            if (it == grouped.by_block.end() || it->second.size() < n) continue;
            VoteTable& table = tables.at(b.block_id);
            vote_update(table, *it->second[n - 1]);
            ++consumed_total;
            const auto decisions = block_decision(table, layout);
            int correct = 0;
            for (int s = 0; s < n_payload; ++s)
                correct += payload_slot_correct(decisions[layout.n_address_slots + s],
                                                b.payloads[s]);
            correct_total += correct - correct_slots[b.block_id];
            correct_slots[b.block_id] = correct;
        }
        CurvePoint pt;
        pt.mean_reads = static_cast<double>(consumed_total) / n_blocks;
        pt.recovery_fraction = static_cast<double>(correct_total) / total_pairs;
        report.curve.push_back(pt);
        if (report.coverage_to_threshold < 0 && pt.recovery_fraction >= threshold)
            report.coverage_to_threshold = pt.mean_reads;
    }

    for (const auto& b : truth_blocks) {
        const VoteTable& table = tables.at(b.block_id);
        const auto decisions = block_decision(table, layout);
        BlockOutcome outcome;
        outcome.block_id = b.block_id;
        outcome.reads_consumed = table.reads_seen;
        outcome.recovered = true;
        for (int s = 0; s < n_payload; ++s)
            outcome.recovered &= payload_slot_correct(decisions[layout.n_address_slots + s],
                                                      b.payloads[s]);
        for (const auto& d : decisions) outcome.final_slots.push_back(d.motifs);
        report.blocks.push_back(std::move(outcome));
    }
    return report;
}

double dilution_accuracy(const std::vector<ReadCall>& calls, const std::vector<Block>& truth_blocks,
                         const BlockLayout& layout) {
    layout.validate();
    if (truth_blocks.empty()) return 0.0;
    std::unordered_map<int64_t, VoteTable> tables;
    for (const auto& b : truth_blocks)
        tables.emplace(b.block_id, VoteTable::for_layout(b.block_id, layout));
    for (const auto& c : calls) {
        if (c.status != "retained") continue;
        const auto it = tables.find(c.block_id);
        if (it != tables.end()) vote_update(it->second, c);
    }
    size_t recovered = 0;
    for (const auto& b : truth_blocks) {
        const auto decisions = block_decision(tables.at(b.block_id), layout);
        bool ok = true;
        for (int s = 0; s < layout.n_payload_slots; ++s)
            ok &= payload_slot_correct(decisions[layout.n_address_slots + s], b.payloads[s]);
        recovered += ok;
    }
    return static_cast<double>(recovered) / truth_blocks.size();
}

std::vector<QualityRow> quality_sweep(const std::vector<ReadCall>& calls,
                                      const std::vector<Block>& truth_blocks,
                                      const BlockLayout& layout,
                                      const std::vector<double>& thresholds) {
    layout.validate();
    std::unordered_map<int64_t, const Block*> truth;
    for (const auto& b : truth_blocks) truth[b.block_id] = &b;

    std::vector<QualityRow> rows;
    for (double q_t : thresholds) {
        QualityRow row;
        row.threshold = q_t;
        size_t retained = 0, total = 0;
        double det_sum = 0.0;
        double err_sum = 0.0;
        size_t err_n = 0;
        for (const auto& c : calls) {
            ++total;
            // unmappable or confidence-free reads count as quality 0
            const double q = c.read_q >= 0 ? c.read_q : 0.0;
            if (q < q_t) continue;
            ++retained;
            const auto it = truth.find(c.block_id);
            if (it == truth.end()) continue;
            const auto score = search::score_read_vs_truth(c, *it->second, layout);
            det_sum += score.detected;
            if (!score.no_calls) {
                err_sum += score.error;
                ++err_n;
            }
        }
        if (total == 0 || retained == 0) {
            row.defined = false;
        } else {
            row.retained_pct = 100.0 * retained / total;
            row.detected_pct = 100.0 * det_sum / retained;
            row.error_pct = err_n ? 100.0 * err_sum / err_n : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string RecoveryReport::to_json_string() const {
    nlohmann::json j;
    j["threshold"] = threshold;
    j["coverage_to_threshold"] =
        coverage_to_threshold >= 0 ? nlohmann::json(coverage_to_threshold) : nlohmann::json();
    j["detected_mean"] = detected_mean;
    j["error_mean"] = error_mean;
    j["retained_fraction"] = retained_fraction;
    auto& curve_arr = j["curve"] = nlohmann::json::array();
    for (const auto& pt : curve)
        curve_arr.push_back({{"mean_reads", pt.mean_reads}, {"recovery_fraction", pt.recovery_fraction}});
    auto& blocks_arr = j["blocks"] = nlohmann::json::array();
    for (const auto& b : blocks)
        blocks_arr.push_back({{"block_id", b.block_id},
                              {"reads_consumed", b.reads_consumed},
                              {"recovered", b.recovered},
                              {"final_slots", b.final_slots}});
    return j.dump(2) + "\n";
}

void RecoveryReport::save_json(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string();
}

void RecoveryReport::save_curve_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "mean_reads,recovery_fraction\n";
    for (const auto& pt : curve) out << pt.mean_reads << ',' << pt.recovery_fraction << '\n';
}

void RecoveryReport::save_blocks_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "block_id,reads_consumed,recovered\n";
    for (const auto& b : blocks)
        out << b.block_id << ',' << b.reads_consumed << ',' << (b.recovered ? 1 : 0) << '\n';
}

}  // namespace motifstore::recovery
