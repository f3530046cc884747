#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

using motifstore::cli::CommonOptions;

namespace {

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_out = true) {
    cmd->add_option("--config", opt.config_path, "Experiment config JSON")
        ->check(CLI::ExistingFile);
    auto* seed = cmd->add_option("--seed", opt.seed, "Master seed (overrides config)");
    cmd->parse_complete_callback([&opt, seed] { opt.has_seed = seed->count() > 0; });
    cmd->add_option("--threads", opt.threads, "Worker threads (overrides config; 0 = all cores)");
    auto* out = cmd->add_option("--out", opt.out_dir, "Output directory");
    if (needs_out) out->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motif-based DNA storage pipeline: encode, simulate, decode, recover"};
    app.require_subcommand(1);

    CommonOptions encode_opt;
    std::filesystem::path encode_input;
    auto* encode = app.add_subcommand("encode", "Pack an input file into composite-motif blocks");
    add_common(encode, encode_opt);
    encode->add_option("--in", encode_input, "Input file")->required()->check(CLI::ExistingFile);

    CommonOptions sim_opt;
    std::filesystem::path sim_blocks;
    auto* simulate =
        app.add_subcommand("simulate", "Assemble oligos, sample reads and squiggles");
    add_common(simulate, sim_opt);
    simulate->add_option("--blocks", sim_blocks, "Blocks file from encode")
        ->required()
        ->check(CLI::ExistingFile);

    CommonOptions search_opt;
    std::filesystem::path search_reads;
    std::string search_method = "am";
    auto* search = app.add_subcommand("search", "Motif search on basecalled reads (ZE or AM)");
    add_common(search, search_opt);
    search->add_option("--reads", search_reads, "Reads FASTA")->required()->check(CLI::ExistingFile);
    search->add_option("--method", search_method, "ze or am")->required();

    CommonOptions call_opt;
    std::filesystem::path call_squiggles, call_pore;
    auto* call = app.add_subcommand("call", "Direct signal-to-motif calling on squiggles");
    add_common(call, call_opt);
    call->add_option("--squiggles", call_squiggles, "Squiggle file (SQG1)")
        ->required()
        ->check(CLI::ExistingFile);
    call->add_option("--pore", call_pore, "Pore model JSON (verified against config)")
        ->check(CLI::ExistingFile);

    CommonOptions recover_opt;
    std::vector<std::filesystem::path> recover_calls;
    std::filesystem::path recover_blocks;
    auto* recover = app.add_subcommand("recover", "Majority-vote recovery and coverage curves");
    add_common(recover, recover_opt);
    recover->add_option("--calls", recover_calls, "Calls files (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    recover->add_option("--blocks", recover_blocks, "Ground-truth blocks file")
        ->required()
        ->check(CLI::ExistingFile);

    CommonOptions report_opt;
    std::string report_dilution;
    int report_dilution_blocks = 50;
    std::filesystem::path report_quality_calls, report_quality_blocks;
    auto* report = app.add_subcommand("report", "Dilution and quality-threshold experiments");
    add_common(report, report_opt);
    report->add_option("--dilution", report_dilution,
                       "Comma-separated Poisson coverages, e.g. 18,7,2.3");
    report->add_option("--dilution-blocks", report_dilution_blocks,
                       "Blocks per dilution corpus");
    report->add_option("--quality-sweep", report_quality_calls,
                       "Caller calls file for the quality-threshold sweep")
        ->check(CLI::ExistingFile);
    report->add_option("--blocks", report_quality_blocks, "Ground-truth blocks file")
        ->check(CLI::ExistingFile);

    auto* selftest = app.add_subcommand("selftest", "Run the built-in brute-force oracle suites");
    (void)selftest;

    CLI11_PARSE(app, argc, argv);

    try {
        if (encode->parsed()) return motifstore::cli::cmd_encode(encode_opt, encode_input);
        if (simulate->parsed()) return motifstore::cli::cmd_simulate(sim_opt, sim_blocks);
        if (search->parsed())
            return motifstore::cli::cmd_search(search_opt, search_reads, search_method);
        if (call->parsed()) return motifstore::cli::cmd_call(call_opt, call_squiggles, call_pore);
        if (recover->parsed())
            return motifstore::cli::cmd_recover(recover_opt, recover_calls, recover_blocks);
        if (report->parsed())
            return motifstore::cli::cmd_report(report_opt, report_dilution, report_dilution_blocks,
                                               report_quality_calls, report_quality_blocks);
        if (selftest->parsed()) return motifstore::cli::cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
