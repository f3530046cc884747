#include "motifstore/calls.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/digest.hpp"

namespace motifstore {

std::optional<int> ReadCall::slot_motif(int slot) const {
    for (const auto& t : tokens)
        if (t.slot == slot) return t.token;
    return std::nullopt;
}

int ReadCall::n_slot_calls() const {
    int n = 0;
    for (const auto& t : tokens) n += t.slot >= 0;
    return n;
}

void write_calls(const std::filesystem::path& path, const CallsFile& file) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    nlohmann::json header;
    header["type"] = "calls_header";
    header["pipeline"] = file.pipeline;
    header["library_digest"] = digest_hex(file.library_digest);
    if (file.pore_digest) header["pore_digest"] = digest_hex(file.pore_digest);
    header["stats"] = file.stats;
    out << header.dump() << '\n';
    for (const auto& c : file.calls) {
        nlohmann::json j;
        j["read_id"] = c.read_id;
        j["block_id"] = c.block_id;
        j["orientation"] = c.reverse ? "R" : "F";
        if (c.read_q >= 0) j["read_q"] = c.read_q;
        j["status"] = c.status;
        auto& toks = j["tokens"] = nlohmann::json::array();
        for (const auto& t : c.tokens) {
            if (t.p_c >= 0)
                toks.push_back({t.slot, t.token, t.p_c, t.q});
            else
                toks.push_back({t.slot, t.token});
        }
        out << j.dump() << '\n';
    }
}

CallsFile read_calls(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calls file: " + path.string());
    CallsFile file;
    std::string line;
    bool have_header = false;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header) {
            have_header = true;
            if (j.value("type", "") != "calls_header")
                throw std::runtime_error(path.string() + ": missing calls header line");
            file.pipeline = j.at("pipeline").get<std::string>();
            file.library_digest = parse_digest_hex(j.at("library_digest").get<std::string>());
            if (j.contains("pore_digest"))
                file.pore_digest = parse_digest_hex(j.at("pore_digest").get<std::string>());
            if (j.contains("stats"))
                file.stats = j.at("stats").get<std::map<std::string, double>>();
            continue;
        }
        ReadCall c;
        c.read_id = j.at("read_id").get<std::string>();
        c.block_id = j.at("block_id").get<int64_t>();
        c.reverse = j.at("orientation").get<std::string>() == "R";
        c.read_q = j.value("read_q", -1.0);
        c.status = j.at("status").get<std::string>();
        for (const auto& t : j.at("tokens")) {
            TokenCall tc;
            tc.slot = t.at(0).get<int>();
            tc.token = t.at(1).get<int>();
            if (t.size() >= 4) {
                tc.p_c = t.at(2).get<double>();
                tc.q = t.at(3).get<double>();
            }
            c.tokens.push_back(tc);
        }
        file.calls.push_back(std::move(c));
    }
    if (!have_header) throw std::runtime_error(path.string() + ": empty calls file");
    return file;
}

}  // namespace motifstore
