#include "motifstore/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "motifstore/caller.hpp"
#include "motifstore/events.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/search.hpp"
#include "motifstore/sequence.hpp"

namespace motifstore::pipeline {

namespace {
constexpr uint64_t kCoverageTag = 0xc0f;
constexpr uint64_t kMixtureTag = 0x317;
constexpr uint64_t kChannelTag = 0xc4a;
constexpr uint64_t kSquiggleTag = 0x59c;
constexpr uint64_t kBlocksTag = 0xb10c;

std::string make_read_id(int64_t block_id, int read_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "b%06lld_r%04d", static_cast<long long>(block_id), read_index);
    return buf;
}
}  // namespace

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    if (threads < 1) threads = 1;
    if (threads == 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t n_threads = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            const size_t lo = n * t / n_threads;
            const size_t hi = n * (t + 1) / n_threads;
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<Block> random_blocks(int n_blocks, const BlockLayout& layout, uint64_t seed) {
    layout.validate();
    const uint64_t n_subsets = codec::choose(layout.library_size, layout.motifs_per_symbol);
    std::vector<Block> blocks;
    blocks.reserve(n_blocks);
    for (int b = 0; b < n_blocks; ++b) {
        Rng rng(derive_seed(seed, kBlocksTag, static_cast<uint64_t>(b)));
        Block blk;
        blk.block_id = b;
        int64_t v = b;
        blk.address.assign(layout.n_address_slots, 0);
        for (int i = layout.n_address_slots - 1; i >= 0; --i) {
            blk.address[i] = static_cast<int>(v % layout.library_size);
            v /= layout.library_size;
        }
        for (int s = 0; s < layout.n_payload_slots; ++s)
            blk.payloads.push_back(codec::subset_unrank(rng.below(n_subsets), layout.library_size,
                                                        layout.motifs_per_symbol));
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

sim::Squiggle Corpus::squiggle_for(size_t i) const {
    const sim::Read& read = reads[i];
    const Origin& origin = origins[i];
    return sim::render_squiggle(
        molecule_sequence(i), pore, config.squiggle.dwell_mean, config.squiggle.noise_std,
        derive_seed(config.seed, static_cast<uint64_t>(origin.block_id),
                    static_cast<uint64_t>(origin.read_index), kSquiggleTag),
        read.read_id);
}

std::string Corpus::molecule_sequence(size_t i) const {
    const sim::Read& read = reads[i];
    const std::string seq = sim::assemble_sequence(read.truth_motifs, library, config.layout);
    return read.reverse ? complement_reverse(seq) : seq;
}

Corpus simulate_corpus(const ExperimentConfig& config, const std::vector<Block>& blocks) {
    Corpus corpus;
    corpus.config = config;
    corpus.config.resolve();
    corpus.library = config.make_library();
    corpus.pore = config.make_pore_model();
    corpus.blocks = blocks;

    // per-block read counts first, so reads can be generated in parallel
    std::vector<int> counts(blocks.size());
    for (size_t b = 0; b < blocks.size(); ++b) {
        if (config.coverage.model == "poisson") {
            Rng rng(derive_seed(config.seed, static_cast<uint64_t>(blocks[b].block_id), 0,
                                kCoverageTag));
            counts[b] = static_cast<int>(rng.poisson(config.coverage.reads_per_block));
        } else {
            counts[b] = static_cast<int>(config.coverage.reads_per_block);
        }
    }
    std::vector<size_t> offsets(blocks.size() + 1, 0);
    for (size_t b = 0; b < blocks.size(); ++b) offsets[b + 1] = offsets[b] + counts[b];
    corpus.reads.resize(offsets.back());
    corpus.origins.resize(offsets.back());

    parallel_for(blocks.size(), corpus.config.effective_threads(), [&](size_t b) {
        const Block& block = corpus.blocks[b];
        for (int i = 0; i < counts[b]; ++i) {
            const auto molecule = sim::assemble_one(
                block, corpus.library, corpus.config.layout,
                derive_seed(config.seed, static_cast<uint64_t>(block.block_id),
                            static_cast<uint64_t>(i), kMixtureTag));
            const size_t slot = offsets[b] + i;
            corpus.reads[slot] = sim::corrupt(
                molecule, config.channel,
                derive_seed(config.seed, static_cast<uint64_t>(block.block_id),
                            static_cast<uint64_t>(i), kChannelTag),
                make_read_id(block.block_id, i));
            corpus.origins[slot] = {block.block_id, i};
        }
    });
    return corpus;
}

namespace {

std::vector<size_t> capped_indices(const Corpus& corpus, size_t max_per_block) {
    std::vector<size_t> idx;
    idx.reserve(corpus.reads.size());
    for (size_t i = 0; i < corpus.reads.size(); ++i)
        if (static_cast<size_t>(corpus.origins[i].read_index) < max_per_block) idx.push_back(i);
    return idx;
}

}  // namespace

CallsFile run_ze(const Corpus& corpus, size_t max_reads_per_block) {
    const auto idx = capped_indices(corpus, max_reads_per_block);
    CallsFile file;
    file.pipeline = "ze";
    file.library_digest = corpus.library.digest();
    file.calls.resize(idx.size());
    parallel_for(idx.size(), corpus.config.effective_threads(), [&](size_t i) {
        file.calls[i] =
            search::ze_search(corpus.reads[idx[i]], corpus.library, corpus.config.layout);
    });
    file.stats["reads"] = static_cast<double>(idx.size());
    return file;
}

CallsFile run_am(const Corpus& corpus, size_t max_reads_per_block) {
    const auto idx = capped_indices(corpus, max_reads_per_block);
    const auto index = search::build_spacer_index(corpus.library, corpus.config.search.k_idx);
    CallsFile file;
    file.pipeline = "am";
    file.library_digest = corpus.library.digest();
    file.calls.resize(idx.size());
    parallel_for(idx.size(), corpus.config.effective_threads(), [&](size_t i) {
        file.calls[i] = search::am_search(corpus.reads[idx[i]], index, corpus.library,
                                          corpus.config.layout, corpus.config.search);
    });
    file.stats["reads"] = static_cast<double>(idx.size());
    return file;
}

CallsFile run_caller(const Corpus& corpus, size_t max_reads_per_block) {
    const auto idx = capped_indices(corpus, max_reads_per_block);
    const auto bank = caller::build_template_bank(corpus.library, corpus.pore);
    const caller::CallerParams& prm = corpus.config.caller;
    CallsFile file;
    file.pipeline = "caller";
    file.library_digest = corpus.library.digest();
    file.pore_digest = corpus.pore.digest();
    file.calls.resize(idx.size());
    std::vector<int> unmappable(idx.size(), 0), rejected(idx.size(), 0);
    parallel_for(idx.size(), corpus.config.effective_threads(), [&](size_t i) {
        const auto squiggle = corpus.squiggle_for(idx[i]);
        const auto events =
            caller::eventize(squiggle.samples, prm.effective_eventize_penalty());
        auto result = caller::viterbi_call(events, bank, corpus.config.layout, prm);
        result.call.read_id = corpus.reads[idx[i]].read_id;
        result.call.block_id = corpus.reads[idx[i]].block_id;
        if (!result.mappable) {
            unmappable[i] = 1;
            file.calls[i] = std::move(result.call);
            return;
        }
        file.calls[i] =
            caller::filter_call(result.call, prm.read_q_min, prm.token_p_min, prm.quality_cap);
        rejected[i] = file.calls[i].status == "rejected";
    });
    file.stats["reads"] = static_cast<double>(idx.size());
    file.stats["unmappable"] = std::accumulate(unmappable.begin(), unmappable.end(), 0.0);
    file.stats["rejected"] = std::accumulate(rejected.begin(), rejected.end(), 0.0);
    return file;
}

std::vector<DilutionRow> dilution_experiment(const ExperimentConfig& config, int n_blocks,
                                             const std::vector<double>& coverages) {
    std::vector<DilutionRow> rows;
    for (double coverage : coverages) {
        ExperimentConfig cfg = config;
        cfg.coverage.model = "poisson";
        cfg.coverage.reads_per_block = coverage;
        cfg.seed = derive_seed(config.seed, 0xd11, static_cast<uint64_t>(coverage * 1000));
        cfg.resolve();
        const auto blocks = random_blocks(n_blocks, cfg.layout, derive_seed(cfg.seed, kBlocksTag));
        const Corpus corpus = simulate_corpus(cfg, blocks);
        const struct {
            const char* name;
            CallsFile file;
        } runs[] = {{"ze", run_ze(corpus)}, {"am", run_am(corpus)}, {"caller", run_caller(corpus)}};
        for (const auto& r : runs) {
            DilutionRow row;
            row.pipeline = r.name;
            row.coverage = coverage;
            row.accuracy = recovery::dilution_accuracy(r.file.calls, corpus.blocks, cfg.layout);
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace motifstore::pipeline
