#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "motifstore/caller.hpp"
#include "motifstore/codec.hpp"
#include "motifstore/ctc.hpp"
#include "motifstore/digest.hpp"
#include "motifstore/events.hpp"
#include "motifstore/pipeline.hpp"
#include "motifstore/recovery.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/search.hpp"

namespace fs = std::filesystem;

namespace motifstore::cli {

namespace {

// Writes through a ".partial" temp name; the final path only appears once the
// content is complete.
template <typename WriteFn>
void atomic_write(const fs::path& path, WriteFn&& write) {
    const fs::path tmp = path.string() + ".partial";
    write(tmp);
    fs::rename(tmp, path);
}

void ensure_out_dir(const fs::path& dir) {
    if (dir.empty()) throw std::runtime_error("--out directory is required");
    fs::create_directories(dir);
}

void write_resolved_config(const ExperimentConfig& cfg, const fs::path& out_dir) {
    atomic_write(out_dir / "config.json", [&](const fs::path& p) { cfg.save(p); });
}

std::vector<uint8_t> read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

// read ids carry block provenance as "b<block>_r<index>"
int64_t block_from_read_id(const std::string& read_id) {
    if (read_id.size() < 2 || read_id[0] != 'b') return -1;
    size_t pos = 1;
    int64_t v = 0;
    bool any = false;
    while (pos < read_id.size() && read_id[pos] >= '0' && read_id[pos] <= '9') {
        v = v * 10 + (read_id[pos] - '0');
        ++pos;
        any = true;
    }
    return any ? v : -1;
}

void check_library_digest(uint64_t got, uint64_t expect, const std::string& what) {
    if (got != expect)
        throw std::runtime_error(what + ": library digest mismatch (file " + digest_hex(got) +
                                 ", config " + digest_hex(expect) +
                                 "); inputs were produced with a different config");
}

}  // namespace

ExperimentConfig CommonOptions::load_config() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    if (has_seed) cfg.seed = seed;     // flags win over the config file
    if (threads > 0) cfg.threads = threads;
    cfg.resolve();
    return cfg;
}

int cmd_encode(const CommonOptions& opt, const fs::path& input) {
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    const auto bytes = read_file_bytes(input);
    const BitVec bits = BitVec::from_bytes(bytes);
    const auto msg = codec::encode(bits, cfg.layout, codec::CodecConfig{cfg.codec_mode});
    const MotifLibrary lib = cfg.make_library();
    atomic_write(opt.out_dir / "library.json", [&](const fs::path& p) { lib.save(p); });
    atomic_write(opt.out_dir / "blocks.json",
                 [&](const fs::path& p) { msg.save(p, lib.digest()); });
    write_resolved_config(cfg, opt.out_dir);
    std::cout << "encoded " << bits.size() << " bits into " << msg.blocks.size()
              << " blocks (padding " << msg.padding_bits << " bits)\n";
    return 0;
}

int cmd_simulate(const CommonOptions& opt, const fs::path& blocks_path) {
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    uint64_t digest = 0;
    const auto msg = codec::EncodedMessage::load(blocks_path, &digest);
    const MotifLibrary lib = cfg.make_library();
    check_library_digest(digest, lib.digest(), blocks_path.string());

    ExperimentConfig corpus_cfg = cfg;
    corpus_cfg.layout = msg.layout;
    corpus_cfg.layout.library_size = cfg.library.size;
    corpus_cfg.resolve();
    const pipeline::Corpus corpus = pipeline::simulate_corpus(corpus_cfg, msg.blocks);

    atomic_write(opt.out_dir / "reads.fasta",
                 [&](const fs::path& p) { sim::write_reads_fasta(p, corpus.reads); });
    atomic_write(opt.out_dir / "truth.jsonl", [&](const fs::path& p) {
        sim::write_truth_sidecar(p, corpus.reads, lib.digest());
    });
    atomic_write(opt.out_dir / "pore_model.json",
                 [&](const fs::path& p) { corpus.pore.save(p); });
    {
        std::vector<sim::Squiggle> squiggles(corpus.reads.size());
        pipeline::parallel_for(corpus.reads.size(), corpus_cfg.effective_threads(),
                               [&](size_t i) { squiggles[i] = corpus.squiggle_for(i); });
        atomic_write(opt.out_dir / "squiggles.sqg",
                     [&](const fs::path& p) { sim::write_squiggles(p, squiggles); });
    }
    write_resolved_config(corpus_cfg, opt.out_dir);
    std::cout << "simulated " << corpus.reads.size() << " reads over " << msg.blocks.size()
              << " blocks\n";
    return 0;
}

int cmd_search(const CommonOptions& opt, const fs::path& reads_path, const std::string& method) {
    if (method != "ze" && method != "am")
        throw std::runtime_error("--method must be ze or am");
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    const MotifLibrary lib = cfg.make_library();
    const auto reads = sim::read_reads_fasta(reads_path);

    CallsFile file;
    file.pipeline = method;
    file.library_digest = lib.digest();
    file.calls.resize(reads.size());
    if (method == "ze") {
        pipeline::parallel_for(reads.size(), cfg.effective_threads(), [&](size_t i) {
            file.calls[i] = search::ze_search(reads[i], lib, cfg.layout);
        });
    } else {
        const auto index = search::build_spacer_index(lib, cfg.search.k_idx);
        pipeline::parallel_for(reads.size(), cfg.effective_threads(), [&](size_t i) {
            file.calls[i] = search::am_search(reads[i], index, lib, cfg.layout, cfg.search);
        });
    }
    // simulated basecalled reads carry no basecaller quality; the read-level
    // quality filter is a pass-through hook here
    file.stats["reads"] = static_cast<double>(reads.size());
    file.stats["retained"] = static_cast<double>(reads.size());
    const fs::path out = opt.out_dir / ("calls_" + method + ".jsonl");
    atomic_write(out, [&](const fs::path& p) { write_calls(p, file); });
    write_resolved_config(cfg, opt.out_dir);
    std::cout << method << " search: " << reads.size() << " reads -> " << out.string() << "\n";
    return 0;
}

int cmd_call(const CommonOptions& opt, const fs::path& squiggles_path, const fs::path& pore_path) {
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    const MotifLibrary lib = cfg.make_library();
    PoreModel pore = cfg.make_pore_model();
    if (!pore_path.empty()) {
        const PoreModel from_file = PoreModel::load(pore_path);
        if (from_file.digest() != pore.digest())
            throw std::runtime_error(pore_path.string() +
                                     ": pore model does not match the configured seed");
        pore = from_file;
    }
    const auto squiggles = sim::read_squiggles(squiggles_path);
    const auto bank = caller::build_template_bank(lib, pore);
    const caller::CallerParams& prm = cfg.caller;

    CallsFile file;
    file.pipeline = "caller";
    file.library_digest = lib.digest();
    file.pore_digest = pore.digest();
    file.calls.resize(squiggles.size());
    std::vector<int> unmappable(squiggles.size(), 0), rejected(squiggles.size(), 0);
    pipeline::parallel_for(squiggles.size(), cfg.effective_threads(), [&](size_t i) {
        const auto events = caller::eventize(squiggles[i].samples, prm.effective_eventize_penalty());
        auto result = caller::viterbi_call(events, bank, cfg.layout, prm);
        result.call.read_id = squiggles[i].read_id;
        result.call.block_id = block_from_read_id(squiggles[i].read_id);
        if (!result.mappable) {
            unmappable[i] = 1;
            file.calls[i] = std::move(result.call);
            return;
        }
        file.calls[i] = caller::filter_call(result.call, prm.read_q_min, prm.token_p_min,
                                            prm.quality_cap);
        rejected[i] = file.calls[i].status == "rejected";
    });
    double n_unmappable = 0, n_rejected = 0;
    for (size_t i = 0; i < squiggles.size(); ++i) {
        n_unmappable += unmappable[i];
        n_rejected += rejected[i];
    }
    file.stats["reads"] = static_cast<double>(squiggles.size());
    file.stats["unmappable"] = n_unmappable;
    file.stats["rejected"] = n_rejected;
    file.stats["retained"] = static_cast<double>(squiggles.size()) - n_unmappable - n_rejected;

    const fs::path out = opt.out_dir / "calls_caller.jsonl";
    atomic_write(out, [&](const fs::path& p) { write_calls(p, file); });
    write_resolved_config(cfg, opt.out_dir);
    std::cout << "caller: " << squiggles.size() << " squiggles, retained "
              << file.stats["retained"] << " -> " << out.string() << "\n";
    return 0;
}

int cmd_recover(const CommonOptions& opt, const std::vector<fs::path>& calls_paths,
                const fs::path& blocks_path) {
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    uint64_t blocks_digest = 0;
    const auto msg = codec::EncodedMessage::load(blocks_path, &blocks_digest);

    std::ostringstream comparison;
    comparison << "pipeline,detected_mean,error_mean,retained_fraction,coverage_to_threshold\n";
    for (const auto& calls_path : calls_paths) {
        const CallsFile file = read_calls(calls_path);
        check_library_digest(file.library_digest, blocks_digest, calls_path.string());
        const auto report =
            recovery::recovery_curve(file.calls, msg.blocks, msg.layout, cfg.recovery.threshold);
        atomic_write(opt.out_dir / ("report_" + file.pipeline + ".json"),
                     [&](const fs::path& p) { report.save_json(p); });
        atomic_write(opt.out_dir / ("curve_" + file.pipeline + ".csv"),
                     [&](const fs::path& p) { report.save_curve_csv(p); });
        atomic_write(opt.out_dir / ("blocks_" + file.pipeline + ".csv"),
                     [&](const fs::path& p) { report.save_blocks_csv(p); });
        comparison << file.pipeline << ',' << report.detected_mean << ',' << report.error_mean
                   << ',' << report.retained_fraction << ',';
        if (report.coverage_to_threshold >= 0) comparison << report.coverage_to_threshold;
        comparison << '\n';
        std::cout << file.pipeline << ": detected " << report.detected_mean * 100 << "%, error "
                  << report.error_mean * 100 << "%, coverage@" << cfg.recovery.threshold << " "
                  << report.coverage_to_threshold << "\n";
    }
    atomic_write(opt.out_dir / "comparison.csv", [&](const fs::path& p) {
        std::ofstream out(p);
        out << comparison.str();
    });
    write_resolved_config(cfg, opt.out_dir);
    return 0;
}

int cmd_report(const CommonOptions& opt, const std::string& dilution_coverages, int dilution_blocks,
               const fs::path& quality_calls, const fs::path& quality_blocks) {
    const ExperimentConfig cfg = opt.load_config();
    ensure_out_dir(opt.out_dir);
    bool did_anything = false;

    if (!dilution_coverages.empty()) {
        std::vector<double> coverages;
        std::stringstream ss(dilution_coverages);
        std::string tok;
        while (std::getline(ss, tok, ',')) coverages.push_back(std::stod(tok));
        const auto rows = pipeline::dilution_experiment(cfg, dilution_blocks, coverages);
        atomic_write(opt.out_dir / "dilution.csv", [&](const fs::path& p) {
            std::ofstream out(p);
            out << "pipeline,coverage,accuracy\n";
            for (const auto& r : rows)
                out << r.pipeline << ',' << r.coverage << ',' << r.accuracy << '\n';
        });
        for (const auto& r : rows)
            std::cout << "dilution " << r.pipeline << " @" << r.coverage << ": "
                      << r.accuracy * 100 << "%\n";
        did_anything = true;
    }

    if (!quality_calls.empty()) {
        if (quality_blocks.empty())
            throw std::runtime_error("--quality-sweep needs --blocks for the ground truth");
        const CallsFile file = read_calls(quality_calls);
        uint64_t blocks_digest = 0;
        const auto msg = codec::EncodedMessage::load(quality_blocks, &blocks_digest);
        check_library_digest(file.library_digest, blocks_digest, quality_calls.string());
        const auto rows =
            recovery::quality_sweep(file.calls, msg.blocks, msg.layout, {0.0, 10.0, 15.0, 20.0});
        atomic_write(opt.out_dir / "quality_sweep.csv", [&](const fs::path& p) {
            std::ofstream out(p);
            out << "threshold,retained_pct,detected_pct,error_pct,defined\n";
            for (const auto& r : rows)
                out << r.threshold << ',' << r.retained_pct << ',' << r.detected_pct << ','
                    << r.error_pct << ',' << (r.defined ? 1 : 0) << '\n';
        });
        for (const auto& r : rows)
            std::cout << "Q" << r.threshold << ": retained " << r.retained_pct << "%, detected "
                      << r.detected_pct << "%\n";
        did_anything = true;
    }

    if (!did_anything)
        throw std::runtime_error("report: nothing requested (use --dilution and/or --quality-sweep)");
    write_resolved_config(cfg, opt.out_dir);
    return 0;
}

namespace {

bool selftest_subset_bijection() {
    for (int M = 1; M <= 10; ++M)
        for (int k = 0; k <= M; ++k) {
            const uint64_t total = codec::choose(M, k);
            for (uint64_t r = 0; r < total; ++r)
                if (codec::subset_rank(codec::subset_unrank(r, M, k), M, k) != r) return false;
        }
    return true;
}

// exhaustive alignment enumeration vs the forward recursion
bool selftest_ctc_enumeration() {
    Rng rng(0x5e1f);
    for (int trial = 0; trial < 25; ++trial) {
        const int T = 2 + static_cast<int>(rng.below(5));
        const int A = 2 + static_cast<int>(rng.below(3));
        ctc::EmissionMatrix m = ctc::EmissionMatrix::zeros(T, A);
        for (int t = 0; t < T; ++t) {
            double sum = 0;
            for (int a = 0; a < A; ++a) {
                m.at(t, a) = 0.05 + rng.uniform01();
                sum += m.at(t, a);
            }
            for (int a = 0; a < A; ++a) m.at(t, a) /= sum;
        }
        const int L = 1 + static_cast<int>(rng.below(2));
        std::vector<int> target;
        for (int i = 0; i < L; ++i) target.push_back(static_cast<int>(rng.below(A - 1)));

        double brute = 0.0;
        std::vector<int> align(T, 0);
        while (true) {
            if (ctc::collapse(align, A - 1) == target) {
                double p = 1.0;
                for (int t = 0; t < T; ++t) p *= m.at(t, align[t]);
                brute += p;
            }
            int i = T - 1;
            while (i >= 0 && align[i] == A - 1) align[i--] = 0;
            if (i < 0) break;
            ++align[i];
        }
        const auto fwd = ctc::ctc_forward(m, target);
        const double got = fwd.feasible ? std::exp(-fwd.loss) : 0.0;
        if (std::abs(got - brute) > 1e-10) return false;
    }
    return true;
}

}  // namespace

int cmd_selftest() {
    int failures = 0;
    const struct {
        const char* name;
        bool (*fn)();
    } suites[] = {
        {"subset rank/unrank bijection (M <= 10, exhaustive)", selftest_subset_bijection},
        {"ctc forward vs alignment enumeration", selftest_ctc_enumeration},
    };
    for (const auto& s : suites) {
        const bool ok = s.fn();
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << s.name << "\n";
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace motifstore::cli
