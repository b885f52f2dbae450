#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "word_lists.hpp"
#include "capkit/text.hpp"

using namespace capkit;
using namespace capkit::text;

namespace {

const Lexicons& lex() {
    static const Lexicons l = Lexicons::load(CAPKIT_TEST_LEXICON_DIR);
    return l;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<CaptionSpec> captions(std::string text, double dbfs = -30.0) {
    return build_caption_specs(audio::Transcript{0, std::move(text), dbfs, {}}, "a1", lex());
}

}  // namespace

TEST(Tokenize, LowercasesAndSplits) {
    EXPECT_EQ(tokenize("Hello, WORLD!  wow"), (std::vector<std::string>{"hello", "world", "wow"}));
    EXPECT_EQ(tokenize(""), std::vector<std::string>{});
    EXPECT_EQ(tokenize("...?!"), std::vector<std::string>{});
    EXPECT_EQ(tokenize("abc123def"), (std::vector<std::string>{"abc", "def"}));
}

TEST(Tokenize, KeepsInnerApostrophesOnly) {
    EXPECT_EQ(tokenize("I'm 'quoted' don't"),
              (std::vector<std::string>{"i'm", "quoted", "don't"}));
    EXPECT_EQ(tokenize("I\xE2\x80\x99m here"), (std::vector<std::string>{"i'm", "here"}));
    EXPECT_EQ(tokenize("cats' toys"), (std::vector<std::string>{"cats", "toys"}));
}

TEST(PosTag, SuffixAndClosedClassTable) {
    struct Case {
        const char* word;
        Pos pos;
    };
    // Expected tags worked out by hand from the documented rule order.
    const Case cases[] = {
        {"the", Pos::Function},      {"and", Pos::Function},   {"i'm", Pos::Function},
        {"wow", Pos::Interjection},  {"bruh", Pos::Interjection}, {"hahaha", Pos::Interjection},
        {"hhhhhh", Pos::Interjection}, {"x", Pos::Other},      {"quickly", Pos::Adverb},
        {"fly", Pos::Noun},          {"only", Pos::Adverb},    {"running", Pos::Verb},
        {"sing", Pos::Noun},         {"jumped", Pos::Verb},    {"red", Pos::Noun},
        {"hopeful", Pos::Adjective}, {"famous", Pos::Adjective}, {"active", Pos::Adjective},
        {"five", Pos::Noun},         {"cat", Pos::Noun},       {"hello", Pos::Noun},
        {"shocked", Pos::Interjection}, {"surprising", Pos::Verb},
    };
    for (const auto& c : cases) {
        EXPECT_EQ(pos_tag(c.word, lex()), c.pos) << c.word;
    }
}

TEST(PosTag, Laughter) {
    EXPECT_TRUE(is_laughter("haha"));
    EXPECT_TRUE(is_laughter("hehehe"));
    EXPECT_TRUE(is_laughter("hhhh"));
    EXPECT_FALSE(is_laughter("ha"));
    EXPECT_FALSE(is_laughter("hahah"));
    EXPECT_FALSE(is_laughter("hehaha"));
    EXPECT_FALSE(is_laughter("hello"));
}

TEST(FilterKeywords, DropsFunctionAndOther) {
    const std::vector<Token> in{{"the", Pos::Function}, {"cat", Pos::Noun}, {"x", Pos::Other},
                                {"wow", Pos::Interjection}, {"ran", Pos::Verb}};
    const auto out = filter_keywords(in);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].text, "cat");
    EXPECT_EQ(out[1].text, "wow");
    EXPECT_EQ(out[2].text, "ran");
}

TEST(SizeBands, Thresholds) {
    const double in[] = {-60, -40.0001, -40, -39.9, -20, -19.9, -10};
    const Size want[] = {Size::Small, Size::Small, Size::Medium, Size::Medium,
                         Size::Medium, Size::Large, Size::Large};
    for (std::size_t i = 0; i < std::size(in); ++i) {
        EXPECT_EQ(map_size(in[i]), want[i]) << in[i];
    }
    EXPECT_EQ(map_size(-std::numeric_limits<double>::infinity()), Size::Small);
    EXPECT_EQ(map_size(std::numeric_limits<double>::quiet_NaN()), Size::Small);
    EXPECT_EQ(map_size(0.0), Size::Large);
}

TEST(SizeBands, MonotoneInLoudness) {
    Size prev = Size::Small;
    for (double d = -100.0; d <= 0.0; d += 0.01) {
        const Size s = map_size(d);
        EXPECT_GE(static_cast<int>(s), static_cast<int>(prev));
        prev = s;
    }
}

TEST(Color, Valence) {
    EXPECT_EQ(map_color(valence("happy", lex())), palette::positive);
    EXPECT_EQ(map_color(valence("awful", lex())), palette::negative);
    EXPECT_EQ(map_color(valence("table", lex())), palette::neutral);
    EXPECT_EQ(palette::positive, (Rgb{1.0, 0.82, 0.26}));
    EXPECT_EQ(palette::negative, (Rgb{0.09, 0.27, 0.61}));
}

TEST(Color, WordInBothListsIsNeutral) {
    Lexicons l;
    l.positive = {"mixed", "good"};
    l.negative = {"mixed", "bad"};
    EXPECT_EQ(valence("mixed", l), Valence::Neutral);
    EXPECT_EQ(valence("good", l), Valence::Positive);
    EXPECT_EQ(valence("bad", l), Valence::Negative);
}

// Each listed word, spoken alone, yields one caption carrying exactly the
// dimensions of the lists it appears in.
TEST(DesignRules, EveryListedWordGetsItsDimensions) {
    std::map<std::string, std::set<std::string>> memberships;
    std::size_t entries = 0;
    for (const auto& list : capkit::testing::reference_word_lists()) {
        for (auto w : list.words) {
            memberships[lower(w)].insert(std::string(list.semantic));
            ++entries;
        }
    }
    ASSERT_EQ(entries, 98u);

    for (const auto& [word, sets] : memberships) {
        const auto specs = captions(word);
        ASSERT_EQ(specs.size(), 1u) << word;
        const auto& s = specs[0];
        EXPECT_EQ(s.typeface == Typeface::Formal, sets.contains("formal")) << word;

        std::optional<Emoji> emoji;
        if (sets.contains("smiling")) emoji = Emoji::Smiling;
        if (sets.contains("sad")) emoji = Emoji::Sad;
        if (sets.contains("embarrassed")) emoji = Emoji::Embarrassed;
        EXPECT_EQ(s.emoji, emoji) << word;

        EXPECT_EQ(s.ornament, sets.contains("object") ? std::optional<std::string>(word) : std::nullopt)
            << word;

        std::optional<Bubble> bubble;
        if (sets.contains("greetings")) bubble = Bubble::Rounded;
        if (sets.contains("interjections")) bubble = Bubble::Spiky;
        EXPECT_EQ(s.bubble, bubble) << word;

        EXPECT_EQ(s.motion, sets.contains("shivering") ? std::optional(Motion::Shivering) : std::nullopt)
            << word;
    }
}

TEST(DesignRules, ShockedIsSpikyAndShivering) {
    const auto specs = captions("Shocked!");
    ASSERT_EQ(specs.size(), 1u);
    EXPECT_EQ(specs[0].bubble, Bubble::Spiky);
    EXPECT_EQ(specs[0].motion, Motion::Shivering);
}

TEST(DesignRules, LaughterIsKeptWithoutBubble) {
    const auto specs = captions("hahaha");
    ASSERT_EQ(specs.size(), 1u);
    EXPECT_EQ(specs[0].bubble, std::nullopt);
}

TEST(DesignRules, BubbleIffListMembership) {
    std::mt19937_64 rng(3);
    std::vector<std::string> pool(lex().positive.begin(), lex().positive.end());
    pool.insert(pool.end(), lex().greetings.begin(), lex().greetings.end());
    pool.insert(pool.end(), lex().interjections.begin(), lex().interjections.end());
    for (int i = 0; i < 2000; ++i) {
        const auto& w = pool[rng() % pool.size()];
        const auto s = design_caption(w, -30.0, lex());
        EXPECT_EQ(s.bubble == Bubble::Rounded, lex().greetings.contains(w)) << w;
        EXPECT_EQ(s.bubble == Bubble::Spiky, lex().interjections.contains(w)) << w;
    }
}

TEST(BuildCaptionSpecs, HappyAtMinus15) {
    const auto specs =
        build_caption_specs(audio::Transcript{7, "happy", -15.0, {}}, "a2", lex());
    ASSERT_EQ(specs.size(), 1u);
    const auto& s = specs[0];
    EXPECT_EQ(s.id, "a2:7:0");
    EXPECT_EQ(s.word, "happy");
    EXPECT_EQ(s.color, palette::positive);
    EXPECT_EQ(s.size, Size::Large);
    EXPECT_EQ(s.typeface, Typeface::Casual);
    EXPECT_EQ(s.emoji, Emoji::Smiling);
    EXPECT_EQ(s.ornament, std::nullopt);
    EXPECT_EQ(s.bubble, std::nullopt);
    EXPECT_EQ(s.motion, std::nullopt);
    EXPECT_EQ(s.speaker, "a2");
    EXPECT_EQ(s.seq, 7u);
}

TEST(BuildCaptionSpecs, FiltersAndNumbersKeywords) {
    const auto specs = captions("The cat and I saw a wonderful tree");
    std::vector<std::string> words;
    for (const auto& s : specs) {
        words.push_back(s.word);
    }
    EXPECT_EQ(words, (std::vector<std::string>{"cat", "saw", "wonderful", "tree"}));
    for (std::size_t i = 0; i < specs.size(); ++i) {
        EXPECT_EQ(specs[i].id, "a1:0:" + std::to_string(i));
    }
    EXPECT_EQ(specs[0].ornament, "cat");
    EXPECT_EQ(specs[3].ornament, "tree");
}

TEST(BuildCaptionSpecs, EmptyAndSilentText) {
    EXPECT_TRUE(captions("").empty());
    EXPECT_TRUE(captions("the and of").empty());
    const auto quiet = captions("hello", audio::silence_dbfs);
    ASSERT_EQ(quiet.size(), 1u);
    EXPECT_EQ(quiet[0].size, Size::Small);
}

TEST(BuildCaptionSpecs, ColorCodomainOverFuzzCorpus) {
    std::mt19937_64 rng(99);
    std::vector<std::string> vocab(lex().positive.begin(), lex().positive.end());
    vocab.insert(vocab.end(), lex().negative.begin(), lex().negative.end());
    const std::set<std::tuple<double, double, double>> allowed = {
        {1.0, 0.82, 0.26}, {0.09, 0.27, 0.61}, {1.0, 1.0, 1.0}};
    for (int i = 0; i < 5000; ++i) {
        std::string word;
        if (rng() % 2 == 0) {
            word = vocab[rng() % vocab.size()];
        } else {
            for (std::size_t n = 1 + rng() % 10; n > 0; --n) {
                word.push_back(static_cast<char>('a' + rng() % 26));
            }
        }
        for (const auto& s : captions(word, -50.0 + static_cast<double>(rng() % 50))) {
            EXPECT_TRUE(allowed.contains({s.color.r, s.color.g, s.color.b})) << word;
        }
    }
}
