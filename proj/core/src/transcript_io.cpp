#include "capkit/transcript_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace capkit::audio {

nlohmann::json dbfs_to_json(double dbfs) {
    if (std::isinf(dbfs) && dbfs < 0) {
        return "-inf";
    }
    return dbfs;
}

double dbfs_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "-inf") {
            return silence_dbfs;
        }
        throw std::invalid_argument("dbfs: expected number or \"-inf\"");
    }
    if (!j.is_number()) {
        throw std::invalid_argument("dbfs: expected number or \"-inf\"");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v) || v > 0.0) {
        throw std::invalid_argument("dbfs must be <= 0");
    }
    return v;
}

void to_json(nlohmann::json& j, const Transcript& t) {
    j = nlohmann::json{{"seq", t.seq}, {"text", t.text}, {"dbfs", dbfs_to_json(t.dbfs)}};
    if (t.warning) {
        j["warning"] = *t.warning;
    }
}

void from_json(const nlohmann::json& j, Transcript& t) {
    t.seq = j.at("seq").get<std::uint64_t>();
    t.text = j.at("text").get<std::string>();
    t.dbfs = dbfs_from_json(j.at("dbfs"));
    t.warning.reset();
    if (auto it = j.find("warning"); it != j.end() && it->is_string()) {
        t.warning = it->get<std::string>();
    }
}

std::vector<Transcript> read_transcripts(std::istream& in) {
    std::vector<Transcript> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(nlohmann::json::parse(line).get<Transcript>());
        } catch (const std::exception& e) {
            throw std::runtime_error("transcript line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
    }
    return out;
}

void write_transcript(std::ostream& out, const Transcript& t) {
    out << nlohmann::json(t).dump() << '\n';
}

}  // namespace capkit::audio
