#include "motifstore/synthsim.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/digest.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/sequence.hpp"

namespace motifstore::sim {

void ChannelParams::validate() const {
    for (double p : {p_sub, p_ins, p_del, p_reverse})
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("ChannelParams: probability outside [0,1]");
    if (p_sub + p_del > 1.0)
        throw std::invalid_argument("ChannelParams: p_sub + p_del must be <= 1");
}

std::string assemble_sequence(const std::vector<int>& chosen_motifs, const MotifLibrary& lib,
                              const BlockLayout& layout) {
    if (static_cast<int>(chosen_motifs.size()) != layout.total_slots())
        throw std::invalid_argument("assemble_sequence: one motif id per slot required");
    if (lib.n_spacers() < layout.n_spacers())
        throw std::invalid_argument("assemble_sequence: library has too few spacers for layout");
    std::string seq;
    seq.reserve(static_cast<size_t>(layout.n_spacers()) * lib.spacer_length +
                static_cast<size_t>(layout.total_slots()) * lib.motif_length);
    for (int s = 0; s < layout.total_slots(); ++s) {
        seq += lib.spacers[s];
        const int m = chosen_motifs[s];
        if (m < 0 || m >= lib.size())
            throw std::invalid_argument("assemble_sequence: motif id out of range");
        seq += lib.motifs[m];
    }
    seq += lib.spacers[layout.total_slots()];
    return seq;
}

Molecule assemble_one(const Block& block, const MotifLibrary& lib, const BlockLayout& layout,
                      uint64_t seed) {
    block.validate(layout);
    Rng rng(seed);
    Molecule mol;
    mol.block_id = block.block_id;
    mol.chosen_motifs.reserve(layout.total_slots());
    for (int a : block.address) mol.chosen_motifs.push_back(a);
    for (const auto& subset : block.payloads)
        mol.chosen_motifs.push_back(subset.ids[rng.below(subset.ids.size())]);
    mol.sequence = assemble_sequence(mol.chosen_motifs, lib, layout);
    return mol;
}

std::vector<Molecule> assemble(const Block& block, const MotifLibrary& lib,
                               const BlockLayout& layout, int n_draws, uint64_t seed) {
    std::vector<Molecule> out;
    out.reserve(n_draws);
    for (int i = 0; i < n_draws; ++i)
        out.push_back(assemble_one(block, lib, layout,
                                   derive_seed(seed, static_cast<uint64_t>(block.block_id),
                                               static_cast<uint64_t>(i), 0xa55)));
    return out;
}

Read corrupt(const Molecule& molecule, const ChannelParams& params, uint64_t seed,
             std::string read_id, ChannelStats* stats) {
    params.validate();
    Rng rng(seed);
    std::string out;
    out.reserve(molecule.sequence.size() + 16);
    for (char c : molecule.sequence) {
        if (stats) ++stats->bases;
        if (rng.bernoulli(params.p_del)) {
            if (stats) ++stats->deletions;
        } else {
            if (rng.bernoulli(params.p_sub)) {
                // uniform over the three alternatives
                const int orig = base_index(c);
                const int alt = static_cast<int>(rng.below(3));
                out += kBaseChars[alt >= orig ? alt + 1 : alt];
                if (stats) ++stats->substitutions;
            } else {
                out += c;
            }
        }
        if (rng.bernoulli(params.p_ins)) {
            out += rng.random_base();
            if (stats) ++stats->insertions;
        }
    }
    Read r;
    r.read_id = std::move(read_id);
    r.block_id = molecule.block_id;
    r.reverse = rng.bernoulli(params.p_reverse);
    r.bases = r.reverse ? complement_reverse(out) : std::move(out);
    r.truth_motifs = molecule.chosen_motifs;
    return r;
}

Squiggle render_squiggle(std::string_view seq, const PoreModel& pore, double dwell_mean,
                         double noise_std, uint64_t seed, std::string read_id) {
    if (static_cast<int>(seq.size()) < pore.kmer_length)
        throw std::invalid_argument("render_squiggle: sequence shorter than pore kmer length");
    if (dwell_mean < 1.0) throw std::invalid_argument("render_squiggle: dwell_mean must be >= 1");
    if (noise_std < 0.0) throw std::invalid_argument("render_squiggle: negative noise_std");
    Rng rng(seed);
    const std::vector<float> levels = kmer_levels(seq, pore);
    Squiggle sq;
    sq.read_id = std::move(read_id);
    sq.samples.reserve(levels.size() * static_cast<size_t>(dwell_mean + 1));
    sq.truth.reserve(sq.samples.capacity());
    for (size_t w = 0; w < levels.size(); ++w) {
        const uint32_t dwell = rng.geometric_ge1(dwell_mean);
        for (uint32_t d = 0; d < dwell; ++d) {
            const double v = noise_std > 0.0 ? rng.normal(levels[w], noise_std) : levels[w];
            sq.samples.push_back(static_cast<float>(v));
            sq.truth.push_back(static_cast<int32_t>(w));
        }
    }
    return sq;
}

// ---- file formats ----

void write_reads_fasta(const std::filesystem::path& path, const std::vector<Read>& reads) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    for (const auto& r : reads) {
        out << '>' << r.read_id << " block=" << r.block_id
            << " orientation=" << (r.reverse ? 'R' : 'F') << '\n';
        out << r.bases << '\n';
    }
}

std::vector<Read> read_reads_fasta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open reads file: " + path.string());
    std::vector<Read> reads;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] != '>')
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected FASTA header");
        Read r;
        std::istringstream hs(line.substr(1));
        std::string tok;
        hs >> r.read_id;
        while (hs >> tok) {
            if (tok.rfind("block=", 0) == 0) r.block_id = std::stoll(tok.substr(6));
            else if (tok.rfind("orientation=", 0) == 0) r.reverse = tok.substr(12) == "R";
        }
        if (!std::getline(in, line))
            throw std::runtime_error(path.string() + ": truncated record for " + r.read_id);
        ++line_no;
        if (!is_dna(line))
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": sequence is not a DNA string");
        r.bases = std::move(line);
        reads.push_back(std::move(r));
    }
    return reads;
}

void write_truth_sidecar(const std::filesystem::path& path, const std::vector<Read>& reads,
                         uint64_t library_digest) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    nlohmann::json header;
    header["type"] = "truth_header";
    header["library_digest"] = digest_hex(library_digest);
    out << header.dump() << '\n';
    for (const auto& r : reads) {
        nlohmann::json j;
        j["read_id"] = r.read_id;
        j["block_id"] = r.block_id;
        j["orientation"] = r.reverse ? "R" : "F";
        j["slot_motifs"] = r.truth_motifs;
        out << j.dump() << '\n';
    }
}

std::vector<TruthRecord> read_truth_sidecar(const std::filesystem::path& path,
                                            uint64_t* library_digest) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open truth sidecar: " + path.string());
    std::vector<TruthRecord> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        if (first) {
            first = false;
            if (j.value("type", "") == "truth_header") {
                if (library_digest)
                    *library_digest = parse_digest_hex(j.at("library_digest").get<std::string>());
                continue;
            }
        }
        TruthRecord t;
        t.read_id = j.at("read_id").get<std::string>();
        t.block_id = j.at("block_id").get<int64_t>();
        t.reverse = j.at("orientation").get<std::string>() == "R";
        t.slot_motifs = j.at("slot_motifs").get<std::vector<int>>();
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
    // Little-endian host assumed (x86-64 / aarch64 LE); static check below.
    static_assert(std::endian::native == std::endian::little);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_le(std::istream& in) {
    static_assert(std::endian::native == std::endian::little);
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void write_squiggles(const std::filesystem::path& path, const std::vector<Squiggle>& squiggles) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write("SQG1", 4);
    for (const auto& sq : squiggles) {
        write_le<uint32_t>(out, static_cast<uint32_t>(sq.read_id.size()));
        out.write(sq.read_id.data(), static_cast<std::streamsize>(sq.read_id.size()));
        write_le<uint32_t>(out, static_cast<uint32_t>(sq.samples.size()));
        out.write(reinterpret_cast<const char*>(sq.samples.data()),
                  static_cast<std::streamsize>(sq.samples.size() * sizeof(float)));
    }
}

std::vector<Squiggle> read_squiggles(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open squiggle file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "SQG1", 4) != 0)
        throw std::runtime_error(path.string() + ": bad squiggle magic (want SQG1)");
    std::vector<Squiggle> out;
    while (true) {
        const uint32_t id_len = read_le<uint32_t>(in);
        if (in.eof()) break;
        if (!in) throw std::runtime_error(path.string() + ": truncated squiggle record");
        Squiggle sq;
        sq.read_id.resize(id_len);
        in.read(sq.read_id.data(), id_len);
        const uint32_t n = read_le<uint32_t>(in);
        sq.samples.resize(n);
        in.read(reinterpret_cast<char*>(sq.samples.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw std::runtime_error(path.string() + ": truncated squiggle record");
        out.push_back(std::move(sq));
    }
    return out;
}

}  // namespace motifstore::sim
