#include "motifstore/pore_model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/digest.hpp"
#include "motifstore/rng.hpp"
#include "motifstore/sequence.hpp"

namespace motifstore {

namespace {
constexpr float kLevelLow = 60.0f;
constexpr float kLevelHigh = 120.0f;
constexpr float kTableStd = 2.0f;
}  // namespace

void PoreModel::validate() const {
    if (kmer_length < 1 || kmer_length > 8)
        throw std::invalid_argument("PoreModel: kmer_length must be in [1,8]");
    const size_t expect = size_t{1} << (2 * kmer_length);
    if (means.size() != expect || stds.size() != expect)
        throw std::invalid_argument("PoreModel: table incomplete");
    for (float s : stds)
        if (!(s > 0)) throw std::invalid_argument("PoreModel: std must be > 0");
}

uint64_t PoreModel::digest() const {
    std::string buf;
    buf.reserve(means.size() * 8 + 8);
    buf.append(reinterpret_cast<const char*>(&kmer_length), sizeof(kmer_length));
    buf.append(reinterpret_cast<const char*>(means.data()), means.size() * sizeof(float));
    buf.append(reinterpret_cast<const char*>(stds.data()), stds.size() * sizeof(float));
    return fnv1a64(buf);
}

std::string PoreModel::to_json_string() const {
    nlohmann::json j;
    j["kmer_length"] = kmer_length;
    j["means"] = means;
    j["stds"] = stds;
    return j.dump() + "\n";
}

PoreModel PoreModel::from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PoreModel p;
    p.kmer_length = j.at("kmer_length").get<int>();
    p.means = j.at("means").get<std::vector<float>>();
    p.stds = j.at("stds").get<std::vector<float>>();
    p.validate();
    return p;
}

void PoreModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string();
}

PoreModel PoreModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pore model: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

PoreModel generate_pore_model(int kappa, uint64_t seed) {
    if (kappa < 1 || kappa > 8)
        throw std::invalid_argument("generate_pore_model: kappa must be in [1,8]");
    PoreModel p;
    p.kmer_length = kappa;
    const size_t n = size_t{1} << (2 * kappa);
    p.means.resize(n);
    p.stds.assign(n, kTableStd);
    Rng rng(derive_seed(seed, 0x90e, static_cast<uint64_t>(kappa)));
    for (size_t i = 0; i < n; ++i)
        p.means[i] = kLevelLow + static_cast<float>(rng.uniform01()) * (kLevelHigh - kLevelLow);
    return p;
}

std::vector<float> kmer_levels(std::string_view seq, const PoreModel& pore) {
    const int k = pore.kmer_length;
    if (static_cast<int>(seq.size()) < k)
        throw std::invalid_argument("kmer_levels: sequence shorter than kmer length");
    const uint64_t mask = (uint64_t{1} << (2 * k)) - 1;
    std::vector<float> out(seq.size() - k + 1);
    uint64_t packed = pack_kmer(seq, 0, k);
    out[0] = pore.mean_at(packed);
    for (size_t i = 1; i < out.size(); ++i) {
        packed = ((packed << 2) | static_cast<uint64_t>(base_index(seq[i + k - 1]))) & mask;
        out[i] = pore.mean_at(packed);
    }
    return out;
}

}  // namespace motifstore
