#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace motifstore {

// Slot geometry of one information block. Slots are ordered address-first;
// spacers are position-specific, one flanking every slot boundary.
struct BlockLayout {
    int n_address_slots = 1;
    int n_payload_slots = 8;
    int motifs_per_symbol = 4;  // k
    int library_size = 8;       // M
    int spacer_length = 40;

    int total_slots() const { return n_address_slots + n_payload_slots; }
    int n_spacers() const { return total_slots() + 1; }

    void validate() const;
};

// The motif alphabet plus position-specific spacers. Motif index = id,
// spacer index = boundary position.
struct MotifLibrary {
    int motif_length = 0;
    int spacer_length = 0;
    std::vector<std::string> motifs;
    std::vector<std::string> spacers;

    int size() const { return static_cast<int>(motifs.size()); }
    int n_spacers() const { return static_cast<int>(spacers.size()); }

    // Structural invariants; with d_min > 0 also checks pairwise motif
    // edit distances (O(M^2) DP).
    void validate(int d_min = 0) const;

    uint64_t digest() const;

    std::string to_json_string() const;
    static MotifLibrary from_json_string(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static MotifLibrary load(const std::filesystem::path& path);
};

// Rejection-samples uniform random base strings until the library invariants
// hold. Pure function of its arguments; throws std::runtime_error after a
// bounded number of attempts if d_min is unsatisfiable for (M, l).
MotifLibrary generate_library(int M, int l, int n_spacers, int l_s, int d_min, uint64_t seed);

}  // namespace motifstore
