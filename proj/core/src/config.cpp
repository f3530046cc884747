#include "motifstore/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "motifstore/rng.hpp"

namespace motifstore {

namespace {
constexpr uint64_t kLibraryTag = 0x11b7a7;
constexpr uint64_t kPoreTag = 0x90de1;
}  // namespace

void ExperimentConfig::resolve() {
    layout.library_size = library.size;
    layout.validate();
    channel.validate();
    if (coverage.model != "fixed" && coverage.model != "poisson")
        throw std::invalid_argument("config: coverage model must be fixed or poisson");
    if (coverage.reads_per_block < 0)
        throw std::invalid_argument("config: negative coverage");
    if (squiggle.kmer_length < 1 || squiggle.kmer_length > 8)
        throw std::invalid_argument("config: squiggle kmer_length must be in [1,8]");
    if (library.motif_length < squiggle.kmer_length ||
        layout.spacer_length < squiggle.kmer_length)
        throw std::invalid_argument("config: sequences shorter than squiggle kmer");
    caller.dwell_mean = squiggle.dwell_mean;
    caller.noise_std = squiggle.noise_std;
}

MotifLibrary ExperimentConfig::make_library() const {
    return generate_library(library.size, library.motif_length, layout.n_spacers(),
                            layout.spacer_length, library.d_min, derive_seed(seed, kLibraryTag));
}

PoreModel ExperimentConfig::make_pore_model() const {
    return generate_pore_model(squiggle.kmer_length, derive_seed(seed, kPoreTag));
}

int ExperimentConfig::effective_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string ExperimentConfig::to_json_string() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["threads"] = threads;
    j["library"] = {{"size", library.size},
                    {"motif_length", library.motif_length},
                    {"d_min", library.d_min}};
    j["layout"] = {{"n_address_slots", layout.n_address_slots},
                   {"n_payload_slots", layout.n_payload_slots},
                   {"motifs_per_symbol", layout.motifs_per_symbol},
                   {"spacer_length", layout.spacer_length}};
    j["codec"] = {{"mode", codec::mode_name(codec_mode)}};
    j["channel"] = {{"p_sub", channel.p_sub},
                    {"p_ins", channel.p_ins},
                    {"p_del", channel.p_del},
                    {"p_reverse", channel.p_reverse}};
    j["coverage"] = {{"model", coverage.model}, {"reads_per_block", coverage.reads_per_block}};
    j["squiggle"] = {{"kmer_length", squiggle.kmer_length},
                     {"dwell_mean", squiggle.dwell_mean},
                     {"noise_std", squiggle.noise_std}};
    j["caller"] = {{"sigma_floor", caller.sigma_floor},
                   {"stay_cost", caller.stay_cost},
                   {"skip_cost", caller.skip_cost},
                   {"warp_band_frac", caller.warp_band_frac},
                   {"confidence_scale", caller.confidence_scale},
                   {"token_p_min", caller.token_p_min},
                   {"read_q_min", caller.read_q_min},
                   {"quality_cap", caller.quality_cap},
                   {"eventize_penalty", caller.eventize_penalty}};
    j["search"] = {{"k_idx", search.k_idx},
                   {"min_support", search.min_support},
                   {"merge_window", search.merge_window},
                   {"refine_window", search.refine_window},
                   {"indel_tol", search.indel_tol},
                   {"margin_min", search.margin_min}};
    j["recovery"] = {{"threshold", recovery.threshold}};
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ExperimentConfig c;
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("library")) {
        const auto& jl = j["library"];
        c.library.size = jl.value("size", c.library.size);
        c.library.motif_length = jl.value("motif_length", c.library.motif_length);
        c.library.d_min = jl.value("d_min", c.library.d_min);
    }
    if (j.contains("layout")) {
        const auto& jl = j["layout"];
        c.layout.n_address_slots = jl.value("n_address_slots", c.layout.n_address_slots);
        c.layout.n_payload_slots = jl.value("n_payload_slots", c.layout.n_payload_slots);
        c.layout.motifs_per_symbol = jl.value("motifs_per_symbol", c.layout.motifs_per_symbol);
        c.layout.spacer_length = jl.value("spacer_length", c.layout.spacer_length);
    }
    if (j.contains("codec")) c.codec_mode = codec::mode_from_name(j["codec"].value("mode", "per-symbol-floor"));
    if (j.contains("channel")) {
        const auto& jc = j["channel"];
        c.channel.p_sub = jc.value("p_sub", c.channel.p_sub);
        c.channel.p_ins = jc.value("p_ins", c.channel.p_ins);
        c.channel.p_del = jc.value("p_del", c.channel.p_del);
        c.channel.p_reverse = jc.value("p_reverse", c.channel.p_reverse);
    }
    if (j.contains("coverage")) {
        const auto& jc = j["coverage"];
        c.coverage.model = jc.value("model", c.coverage.model);
        c.coverage.reads_per_block = jc.value("reads_per_block", c.coverage.reads_per_block);
    }
    if (j.contains("squiggle")) {
        const auto& js = j["squiggle"];
        c.squiggle.kmer_length = js.value("kmer_length", c.squiggle.kmer_length);
        c.squiggle.dwell_mean = js.value("dwell_mean", c.squiggle.dwell_mean);
        c.squiggle.noise_std = js.value("noise_std", c.squiggle.noise_std);
    }
    if (j.contains("caller")) {
        const auto& jc = j["caller"];
        c.caller.sigma_floor = jc.value("sigma_floor", c.caller.sigma_floor);
        c.caller.stay_cost = jc.value("stay_cost", c.caller.stay_cost);
        c.caller.skip_cost = jc.value("skip_cost", c.caller.skip_cost);
        c.caller.warp_band_frac = jc.value("warp_band_frac", c.caller.warp_band_frac);
        c.caller.confidence_scale = jc.value("confidence_scale", c.caller.confidence_scale);
        c.caller.token_p_min = jc.value("token_p_min", c.caller.token_p_min);
        c.caller.read_q_min = jc.value("read_q_min", c.caller.read_q_min);
        c.caller.quality_cap = jc.value("quality_cap", c.caller.quality_cap);
        c.caller.eventize_penalty = jc.value("eventize_penalty", c.caller.eventize_penalty);
    }
    if (j.contains("search")) {
        const auto& js = j["search"];
        c.search.k_idx = js.value("k_idx", c.search.k_idx);
        c.search.min_support = js.value("min_support", c.search.min_support);
        c.search.merge_window = js.value("merge_window", c.search.merge_window);
        c.search.refine_window = js.value("refine_window", c.search.refine_window);
        c.search.indel_tol = js.value("indel_tol", c.search.indel_tol);
        c.search.margin_min = js.value("margin_min", c.search.margin_min);
    }
    if (j.contains("recovery")) c.recovery.threshold = j["recovery"].value("threshold", 0.95);
    c.resolve();
    return c;
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string();
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

}  // namespace motifstore
