#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace motifstore {

// One detected token. Motif calls carry the slot they were assigned to;
// structural spacer detections carry slot = -1. Pipelines without confidence
// estimates (ZE/AM) leave p_c and q negative.
struct TokenCall {
    int slot = -1;
    int token = 0;  // alphabet token id: motifs 0..M-1, spacers M..M+S-1
    double p_c = -1.0;
    double q = -1.0;
};

// Per-read decoding result, shared by the search and caller pipelines so
// recovery is pipeline-agnostic.
struct ReadCall {
    std::string read_id;
    int64_t block_id = 0;
    bool reverse = false;
    double read_q = -1.0;  // mean payload-call quality; < 0 when undefined
    std::string status = "retained";  // retained | rejected | unmappable
    std::vector<TokenCall> tokens;

    std::optional<int> slot_motif(int slot) const;
    int n_slot_calls() const;
};

struct CallsFile {
    std::string pipeline;  // "ze" | "am" | "caller"
    uint64_t library_digest = 0;
    uint64_t pore_digest = 0;  // 0 when not applicable
    std::map<std::string, double> stats;
    std::vector<ReadCall> calls;
};

// JSONL: a header line then one record per read.
void write_calls(const std::filesystem::path& path, const CallsFile& file);
CallsFile read_calls(const std::filesystem::path& path);

}  // namespace motifstore
