#include "capkit/lexicons.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace capkit::text {
namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return std::isspace(c) == 0; };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> content_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open lexicon file " + file.string());
    }
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(std::move(line));
        if (!line.empty()) {
            out.push_back(std::move(line));
        }
    }
    return out;
}

WordSet load_set(const std::filesystem::path& dir, const char* name) {
    const auto words = read_word_lines(dir / name);
    return WordSet(words.begin(), words.end());
}

void require_disjoint(const WordSet& a, const char* a_name, const WordSet& b,
                      const char* b_name) {
    for (const auto& w : a) {
        if (b.contains(w)) {
            throw ConfigError("lexicon conflict: '" + w + "' is in both " + a_name +
                              " and " + b_name);
        }
    }
}

}  // namespace

std::vector<std::string> read_word_lines(const std::filesystem::path& file) {
    std::vector<std::string> out;
    for (auto& line : content_lines(file)) {
        if (line.find_first_of(" \t") != std::string::npos) {
            throw ConfigError(file.string() + ": entry contains whitespace: '" + line + "'");
        }
        out.push_back(lower(std::move(line)));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> read_ornament_rows(
    const std::filesystem::path& file) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : content_lines(file)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(file.string() + ": expected word,icon_id: '" + line + "'");
        }
        auto word = lower(trim(line.substr(0, comma)));
        auto icon = trim(line.substr(comma + 1));
        if (word.empty() || icon.empty()) {
            throw ConfigError(file.string() + ": empty field in '" + line + "'");
        }
        out.emplace_back(std::move(word), std::move(icon));
    }
    return out;
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
    Lexicons lex;
    lex.positive = load_set(dir, "positive.txt");
    lex.negative = load_set(dir, "negative.txt");
    lex.formal = load_set(dir, "formal.txt");
    lex.smiling = load_set(dir, "smiling.txt");
    lex.sad = load_set(dir, "sad.txt");
    lex.embarrassed = load_set(dir, "embarrassed.txt");
    lex.greetings = load_set(dir, "greetings.txt");
    lex.interjections = load_set(dir, "interjections.txt");
    lex.shivering = load_set(dir, "shivering.txt");
    for (auto& [word, icon] : read_ornament_rows(dir / "ornament.csv")) {
        auto [it, inserted] = lex.ornament.emplace(word, icon);
        if (!inserted && it->second != icon) {
            throw ConfigError("ornament '" + word + "' mapped to both '" + it->second +
                              "' and '" + icon + "'");
        }
    }
    lex.validate();
    return lex;
}

void Lexicons::validate() const {
    require_disjoint(smiling, "smiling", sad, "sad");
    require_disjoint(smiling, "smiling", embarrassed, "embarrassed");
    require_disjoint(sad, "sad", embarrassed, "embarrassed");
    require_disjoint(greetings, "greetings", interjections, "interjections");
}

std::filesystem::path default_lexicon_dir() {
    const std::filesystem::path source{CAPKIT_DEFAULT_LEXICON_DIR};
    std::error_code ec;
    if (std::filesystem::exists(source / "formal.txt", ec)) {
        return source;
    }
    return std::filesystem::path{CAPKIT_INSTALLED_LEXICON_DIR};
}

}  // namespace capkit::text
