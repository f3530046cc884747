#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "motifstore/config.hpp"

namespace motifstore::cli {

struct CommonOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
    bool has_seed = false;
    uint64_t seed = 0;
    int threads = 0;  // 0 = config value

    ExperimentConfig load_config() const;
};

int cmd_encode(const CommonOptions& opt, const std::filesystem::path& input);
int cmd_simulate(const CommonOptions& opt, const std::filesystem::path& blocks_path);
int cmd_search(const CommonOptions& opt, const std::filesystem::path& reads_path,
               const std::string& method);
int cmd_call(const CommonOptions& opt, const std::filesystem::path& squiggles_path,
             const std::filesystem::path& pore_path);
int cmd_recover(const CommonOptions& opt, const std::vector<std::filesystem::path>& calls_paths,
                const std::filesystem::path& blocks_path);
int cmd_report(const CommonOptions& opt, const std::string& dilution_coverages, int dilution_blocks,
               const std::filesystem::path& quality_calls,
               const std::filesystem::path& quality_blocks);
int cmd_selftest();

}  // namespace motifstore::cli
