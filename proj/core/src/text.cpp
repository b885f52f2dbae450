#include "capkit/text.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>

namespace capkit::text {
namespace {

bool is_letter(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char to_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Articles, determiners, conjunctions, particles, adpositions, pronouns,
// auxiliaries and their common contractions.
constexpr std::string_view kFunctionWords[] = {
    "a", "an", "the",
    "this", "that", "these", "those", "some", "any", "each", "every", "either",
    "neither", "no", "all", "both", "few", "many", "much", "more", "most", "other",
    "another", "such", "own", "same",
    "and", "or", "but", "nor", "so", "yet", "because", "although", "though", "if",
    "unless", "while", "whereas", "whether", "than", "as", "since", "until", "once",
    "to", "not", "also", "just", "then", "there", "here", "very", "too",
    "of", "in", "on", "at", "by", "for", "with", "from", "about", "into", "onto",
    "over", "under", "between", "through", "during", "before", "after", "above",
    "below", "without", "within", "across", "against", "among", "around",
    "toward", "towards", "upon", "off", "out", "up", "down", "via", "per",
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "he",
    "him", "his", "himself", "she", "her", "hers", "herself", "it", "its",
    "itself", "we", "us", "our", "ours", "ourselves", "they", "them", "their",
    "theirs", "themselves", "who", "whom", "whose", "which", "what",
    "am", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did",
    "have", "has", "had", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must",
    "i'm", "i've", "i'll", "i'd", "you're", "you've", "you'll", "you'd", "he's",
    "she's", "it's", "we're", "we've", "they're", "they've", "that's", "there's",
    "let's", "don't", "doesn't", "didn't", "isn't", "aren't", "wasn't", "weren't",
    "can't", "won't", "wouldn't", "shouldn't", "couldn't", "haven't", "hasn't",
    "hadn't",
};

bool ends_with(std::string_view word, std::string_view suffix) {
    // Require a stem of at least two letters in front of the suffix.
    return word.size() >= suffix.size() + 2 && word.ends_with(suffix);
}

}  // namespace

std::string_view to_string(Pos pos) {
    switch (pos) {
        case Pos::Noun: return "Noun";
        case Pos::Verb: return "Verb";
        case Pos::Adjective: return "Adjective";
        case Pos::Adverb: return "Adverb";
        case Pos::Interjection: return "Interjection";
        case Pos::Function: return "Function";
        case Pos::Other: return "Other";
    }
    return "Other";
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (is_letter(c)) {
            cur.push_back(to_lower(c));
            continue;
        }
        // U+2019 (right single quote) counts as an apostrophe.
        const bool ascii_apos = c == '\'';
        const bool curly_apos = text.substr(i, 3) == "\xE2\x80\x99";
        if ((ascii_apos || curly_apos) && !cur.empty()) {
            const std::size_t next = i + (curly_apos ? 3 : 1);
            if (next < text.size() && is_letter(text[next])) {
                cur.push_back('\'');
                i = next - 1;
                continue;
            }
        }
        if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

bool is_function_word(std::string_view word) {
    return std::find(std::begin(kFunctionWords), std::end(kFunctionWords), word) !=
           std::end(kFunctionWords);
}

bool is_laughter(std::string_view word) {
    // "hhhh", "haha", "hehehe", "hihi".
    if (word.size() < 4 || word.front() != 'h') {
        return false;
    }
    if (std::all_of(word.begin(), word.end(), [](char c) { return c == 'h'; })) {
        return true;
    }
    for (std::string_view unit : {"ha", "he", "hi"}) {
        if (word.size() % 2 != 0) {
            break;
        }
        bool repeated = true;
        for (std::size_t i = 0; i < word.size(); i += 2) {
            if (word.substr(i, 2) != unit) {
                repeated = false;
                break;
            }
        }
        if (repeated) {
            return true;
        }
    }
    return false;
}

Pos HeuristicTagger::tag(std::string_view word) const {
    if (word.empty()) {
        return Pos::Other;
    }
    if (is_function_word(word)) {
        return Pos::Function;
    }
    if (lex_->interjections.contains(word) || is_laughter(word)) {
        return Pos::Interjection;
    }
    if (word.size() == 1) {
        return Pos::Other;
    }
    if (ends_with(word, "ly")) {
        return Pos::Adverb;
    }
    if (ends_with(word, "ing") || ends_with(word, "ed")) {
        return Pos::Verb;
    }
    if (ends_with(word, "ful") || ends_with(word, "ous") || ends_with(word, "ive")) {
        return Pos::Adjective;
    }
    return Pos::Noun;
}

Pos pos_tag(std::string_view word, const Lexicons& lex) {
    return HeuristicTagger(lex).tag(word);
}

std::vector<Token> filter_keywords(const std::vector<Token>& tokens) {
    std::vector<Token> kept;
    std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(kept), [](const Token& t) {
        return t.pos != Pos::Function && t.pos != Pos::Other;
    });
    return kept;
}

Valence valence(std::string_view word, const Lexicons& lex) {
    const bool pos = lex.positive.contains(word);
    const bool neg = lex.negative.contains(word);
    if (pos && !neg) {
        return Valence::Positive;
    }
    if (neg && !pos) {
        return Valence::Negative;
    }
    return Valence::Neutral;
}

Rgb map_color(Valence v) {
    switch (v) {
        case Valence::Positive: return palette::positive;
        case Valence::Negative: return palette::negative;
        case Valence::Neutral: return palette::neutral;
    }
    return palette::neutral;
}

Size map_size(double dbfs) {
    // NaN and -inf both land in Small.
    if (!(dbfs >= -40.0)) {
        return Size::Small;
    }
    if (dbfs <= -20.0) {
        return Size::Medium;
    }
    return Size::Large;
}

Typeface map_typeface(std::string_view word, const Lexicons& lex) {
    return lex.formal.contains(word) ? Typeface::Formal : Typeface::Casual;
}

std::optional<Emoji> map_emoji(std::string_view word, const Lexicons& lex) {
    if (lex.smiling.contains(word)) {
        return Emoji::Smiling;
    }
    if (lex.sad.contains(word)) {
        return Emoji::Sad;
    }
    if (lex.embarrassed.contains(word)) {
        return Emoji::Embarrassed;
    }
    return std::nullopt;
}

std::optional<std::string> map_ornament(std::string_view word, const Lexicons& lex) {
    if (auto it = lex.ornament.find(word); it != lex.ornament.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::optional<Bubble> map_bubble(std::string_view word, const Lexicons& lex) {
    if (lex.greetings.contains(word)) {
        return Bubble::Rounded;
    }
    if (lex.interjections.contains(word)) {
        return Bubble::Spiky;
    }
    return std::nullopt;
}

std::optional<Motion> map_motion(std::string_view word, const Lexicons& lex) {
    if (lex.shivering.contains(word)) {
        return Motion::Shivering;
    }
    return std::nullopt;
}

CaptionSpec design_caption(std::string_view word, double dbfs, const Lexicons& lex) {
    CaptionSpec s;
    s.word = std::string(word);
    s.color = map_color(valence(word, lex));
    s.size = map_size(dbfs);
    s.typeface = map_typeface(word, lex);
    s.emoji = map_emoji(word, lex);
    s.ornament = map_ornament(word, lex);
    s.bubble = map_bubble(word, lex);
    s.motion = map_motion(word, lex);
    return s;
}

std::vector<CaptionSpec> build_caption_specs(const audio::Transcript& t,
                                             std::string_view speaker,
                                             const Lexicons& lex, const Tagger& tagger) {
    std::vector<Token> tokens;
    for (auto& word : tokenize(t.text)) {
        const Pos pos = tagger.tag(word);
        tokens.push_back(Token{std::move(word), pos});
    }

    std::vector<CaptionSpec> specs;
    for (const auto& token : filter_keywords(tokens)) {
        CaptionSpec s = design_caption(token.text, t.dbfs, lex);
        s.id = std::string(speaker) + ":" + std::to_string(t.seq) + ":" +
               std::to_string(specs.size());
        s.speaker = std::string(speaker);
        s.seq = t.seq;
        specs.push_back(std::move(s));
    }
    return specs;
}

std::vector<CaptionSpec> build_caption_specs(const audio::Transcript& t,
                                             std::string_view speaker,
                                             const Lexicons& lex) {
    return build_caption_specs(t, speaker, lex, HeuristicTagger(lex));
}

}  // namespace capkit::text
