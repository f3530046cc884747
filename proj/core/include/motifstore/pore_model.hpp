#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace motifstore {

// Synthetic k-mer current table: one (mean, std) pair per 2-bit-packed k-mer.
struct PoreModel {
    int kmer_length = 6;
    std::vector<float> means;  // picoamps, indexed by packed k-mer
    std::vector<float> stds;

    size_t table_size() const { return means.size(); }
    float mean_at(uint64_t kmer) const { return means[kmer]; }

    void validate() const;
    uint64_t digest() const;

    std::string to_json_string() const;
    static PoreModel from_json_string(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static PoreModel load(const std::filesystem::path& path);
};

// Means uniform in [60, 120] pA, fixed per-kmer std; complete over all 4^k
// k-mers and deterministic under the seed.
PoreModel generate_pore_model(int kappa, uint64_t seed);

// Expected current level of every k-mer window of `seq` (size |seq|-k+1).
std::vector<float> kmer_levels(std::string_view seq, const PoreModel& pore);

}  // namespace motifstore
