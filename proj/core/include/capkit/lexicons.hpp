#ifndef CAPKIT_LEXICONS_HPP
#define CAPKIT_LEXICONS_HPP

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace capkit::text {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using WordSet = std::set<std::string, std::less<>>;

/// Word lists driving the caption rules. All entries are lowercased at load.
struct Lexicons {
    WordSet positive;
    WordSet negative;
    WordSet formal;
    WordSet smiling;
    WordSet sad;
    WordSet embarrassed;
    std::map<std::string, std::string, std::less<>> ornament;  // word -> icon id
    WordSet greetings;
    WordSet interjections;
    WordSet shivering;

    /// Loads the bundled file layout from `dir`:
    ///   positive.txt negative.txt formal.txt smiling.txt sad.txt
    ///   embarrassed.txt greetings.txt interjections.txt shivering.txt
    ///   ornament.csv
    /// Throws ConfigError on a missing file or a violated invariant.
    static Lexicons load(const std::filesystem::path& dir);

    /// Throws ConfigError if the emoji lists overlap or a word is both a
    /// greeting and an interjection.
    void validate() const;
};

/// Lexicon directory compiled into the library (source tree, falling back to
/// the install prefix).
std::filesystem::path default_lexicon_dir();

/// Reads one-word-per-line content: '#' starts a comment, blank lines are
/// ignored, words are lowercased. Returned in file order, duplicates kept.
std::vector<std::string> read_word_lines(const std::filesystem::path& file);

/// Reads `word,icon_id` rows in file order, duplicates kept.
std::vector<std::pair<std::string, std::string>> read_ornament_rows(
    const std::filesystem::path& file);

}  // namespace capkit::text

#endif  // CAPKIT_LEXICONS_HPP
