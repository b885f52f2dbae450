#ifndef CAPKIT_TEXT_HPP
#define CAPKIT_TEXT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capkit/audio.hpp"
#include "capkit/caption_spec.hpp"
#include "capkit/lexicons.hpp"

namespace capkit::text {

enum class Pos : std::uint8_t {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Interjection,
    Function,
    Other,
};

std::string_view to_string(Pos pos);

struct Token {
    std::string text;
    Pos pos = Pos::Other;

    friend bool operator==(const Token&, const Token&) = default;
};

enum class Valence : std::uint8_t { Positive, Negative, Neutral };

/// Lowercased alphabetic runs. Apostrophes survive only between letters, so
/// "I'm" stays one token and "'quoted'" loses its quotes.
std::vector<std::string> tokenize(std::string_view text);

/// Part-of-speech tagger interface; heuristic_tag below is the default.
class Tagger {
public:
    virtual ~Tagger() = default;
    virtual Pos tag(std::string_view word) const = 0;
};

/// Closed-class stoplist, then the interjection lexicon (plus laughter runs
/// like "hahaha"), then suffix rules, then Noun.
class HeuristicTagger final : public Tagger {
public:
    explicit HeuristicTagger(const Lexicons& lex) : lex_(&lex) {}
    Pos tag(std::string_view word) const override;

private:
    const Lexicons* lex_;
};

Pos pos_tag(std::string_view word, const Lexicons& lex);

bool is_function_word(std::string_view word);
bool is_laughter(std::string_view word);

/// Keeps content words and interjections.
std::vector<Token> filter_keywords(const std::vector<Token>& tokens);

Valence valence(std::string_view word, const Lexicons& lex);
Rgb map_color(Valence v);
Size map_size(double dbfs);
Typeface map_typeface(std::string_view word, const Lexicons& lex);
std::optional<Emoji> map_emoji(std::string_view word, const Lexicons& lex);
std::optional<std::string> map_ornament(std::string_view word, const Lexicons& lex);
std::optional<Bubble> map_bubble(std::string_view word, const Lexicons& lex);
std::optional<Motion> map_motion(std::string_view word, const Lexicons& lex);

/// Applies every mapping to a single keyword.
CaptionSpec design_caption(std::string_view word, double dbfs, const Lexicons& lex);

/// One caption per kept keyword of the transcript. Spec ids are
/// "<speaker>:<seq>:<n>" with n counting kept words.
std::vector<CaptionSpec> build_caption_specs(const audio::Transcript& t,
                                              std::string_view speaker,
                                              const Lexicons& lex);
std::vector<CaptionSpec> build_caption_specs(const audio::Transcript& t,
                                             std::string_view speaker,
                                             const Lexicons& lex, const Tagger& tagger);

}  // namespace capkit::text

#endif  // CAPKIT_TEXT_HPP
