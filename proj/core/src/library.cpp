#include "motifstore/library.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/digest.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/sequence.hpp"

namespace motifstore {

void BlockLayout::validate() const {
    if (n_address_slots < 0 || n_payload_slots < 1)
        throw std::invalid_argument("BlockLayout: need n_payload_slots >= 1, n_address_slots >= 0");
    if (motifs_per_symbol < 1 || motifs_per_symbol > library_size)
        throw std::invalid_argument("BlockLayout: need 1 <= k <= M");
    if (spacer_length < 1) throw std::invalid_argument("BlockLayout: spacer_length < 1");
}

void MotifLibrary::validate(int d_min) const {
    if (motifs.size() < 2) throw std::invalid_argument("MotifLibrary: need at least 2 motifs");
    std::set<std::string> seen;
    for (const auto& m : motifs) {
        if (static_cast<int>(m.size()) != motif_length)
            throw std::invalid_argument("MotifLibrary: motif length mismatch");
        if (!is_dna(m)) throw std::invalid_argument("MotifLibrary: motif is not a DNA string");
        if (!seen.insert(m).second) throw std::invalid_argument("MotifLibrary: duplicate motif");
    }
    for (const auto& s : spacers) {
        if (static_cast<int>(s.size()) != spacer_length)
            throw std::invalid_argument("MotifLibrary: spacer length mismatch");
        if (!is_dna(s)) throw std::invalid_argument("MotifLibrary: spacer is not a DNA string");
        if (!seen.insert(s).second)
            throw std::invalid_argument("MotifLibrary: spacer collides with another sequence");
    }
    if (d_min > 0) {
        for (size_t i = 0; i < motifs.size(); ++i)
            for (size_t j = i + 1; j < motifs.size(); ++j)
                if (edit_distance(motifs[i], motifs[j]) < d_min)
                    throw std::invalid_argument("MotifLibrary: motif pair closer than d_min");
    }
}

uint64_t MotifLibrary::digest() const {
    std::ostringstream os;
    os << motif_length << '\n' << spacer_length << '\n';
    for (const auto& m : motifs) os << m << '\n';
    os << '|' << '\n';
    for (const auto& s : spacers) os << s << '\n';
    return fnv1a64(os.str());
}

std::string MotifLibrary::to_json_string() const {
    nlohmann::json j;
    j["motif_length"] = motif_length;
    j["spacer_length"] = spacer_length;
    j["motifs"] = motifs;
    j["spacers"] = spacers;
    return j.dump(2) + "\n";
}

MotifLibrary MotifLibrary::from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MotifLibrary lib;
    lib.motif_length = j.at("motif_length").get<int>();
    lib.spacer_length = j.at("spacer_length").get<int>();
    lib.motifs = j.at("motifs").get<std::vector<std::string>>();
    lib.spacers = j.at("spacers").get<std::vector<std::string>>();
    lib.validate();
    return lib;
}

void MotifLibrary::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string();
}

MotifLibrary MotifLibrary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open library file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

namespace {

std::string random_dna(Rng& rng, int len) {
    std::string s(static_cast<size_t>(len), 'A');
    for (auto& c : s) c = rng.random_base();
    return s;
}

}  // namespace

MotifLibrary generate_library(int M, int l, int n_spacers, int l_s, int d_min, uint64_t seed) {
    if (M < 2) throw std::invalid_argument("generate_library: M must be >= 2");
    if (l < 1 || l_s < 1) throw std::invalid_argument("generate_library: lengths must be >= 1");
    if (d_min > l)
        throw std::invalid_argument(
            "generate_library: d_min exceeds achievable distance (d_min > motif length)");
    if (n_spacers < 0) throw std::invalid_argument("generate_library: n_spacers < 0");

    Rng rng(derive_seed(seed, 0x11b, static_cast<uint64_t>(M), static_cast<uint64_t>(l)));
    MotifLibrary lib;
    lib.motif_length = l;
    lib.spacer_length = l_s;

    const long max_attempts = 2000L * (M + n_spacers);
    long attempts = 0;
    while (static_cast<int>(lib.motifs.size()) < M) {
        if (++attempts > max_attempts)
            throw std::runtime_error(
                "generate_library: could not satisfy pairwise edit distance >= " +
                std::to_string(d_min) + " for M=" + std::to_string(M) +
                ", l=" + std::to_string(l) + " within attempt budget");
        std::string cand = random_dna(rng, l);
        bool ok = true;
        for (const auto& m : lib.motifs)
            if (edit_distance(m, cand) < d_min) {
                ok = false;
                break;
            }
        if (ok) lib.motifs.push_back(std::move(cand));
    }
    while (static_cast<int>(lib.spacers.size()) < n_spacers) {
        if (++attempts > max_attempts)
            throw std::runtime_error("generate_library: spacer generation exceeded attempt budget");
        std::string cand = random_dna(rng, l_s);
        bool ok = true;
        for (const auto& s : lib.spacers)
            if (s == cand) ok = false;
        if (l_s == l)
            for (const auto& m : lib.motifs)
                if (m == cand) ok = false;
        if (ok) lib.spacers.push_back(std::move(cand));
    }
    lib.validate(d_min);
    return lib;
}

}  // namespace motifstore
