#include "capkit/caption_spec.hpp"

#include <stdexcept>

namespace capkit {
namespace {

template <typename E, std::size_t N>
E parse_enum(const nlohmann::json& j, const std::array<E, N>& values, const char* field) {
    const auto s = j.get<std::string>();
    for (E v : values) {
        if (to_string(v) == s) {
            return v;
        }
    }
    throw std::invalid_argument(std::string("unknown ") + field + ": " + s);
}

template <typename E, std::size_t N>
std::optional<E> parse_optional(const nlohmann::json& j, const char* key,
                                const std::array<E, N>& values) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    return parse_enum(*it, values, key);
}

template <typename E>
nlohmann::json optional_to_json(const std::optional<E>& v) {
    return v ? nlohmann::json(std::string(to_string(*v))) : nlohmann::json(nullptr);
}

constexpr std::array sizes{Size::Small, Size::Medium, Size::Large};
constexpr std::array typefaces{Typeface::Formal, Typeface::Casual};
constexpr std::array emojis{Emoji::Smiling, Emoji::Sad, Emoji::Embarrassed};
constexpr std::array bubbles{Bubble::Rounded, Bubble::Spiky};
constexpr std::array motions{Motion::Shivering};

}  // namespace

std::string_view to_string(Size v) {
    switch (v) {
        case Size::Small: return "Small";
        case Size::Medium: return "Medium";
        case Size::Large: return "Large";
    }
    return "?";
}

std::string_view to_string(Typeface v) {
    return v == Typeface::Formal ? "Formal" : "Casual";
}

std::string_view to_string(Emoji v) {
    switch (v) {
        case Emoji::Smiling: return "Smiling";
        case Emoji::Sad: return "Sad";
        case Emoji::Embarrassed: return "Embarrassed";
    }
    return "?";
}

std::string_view to_string(Bubble v) {
    return v == Bubble::Rounded ? "Rounded" : "Spiky";
}

std::string_view to_string(Motion) { return "Shivering"; }

void to_json(nlohmann::json& j, const CaptionSpec& s) {
    j = nlohmann::json{
        {"id", s.id},
        {"word", s.word},
        {"color", {s.color.r, s.color.g, s.color.b}},
        {"size", to_string(s.size)},
        {"typeface", to_string(s.typeface)},
        {"emoji", optional_to_json(s.emoji)},
        {"ornament", s.ornament ? nlohmann::json(*s.ornament) : nlohmann::json(nullptr)},
        {"bubble", optional_to_json(s.bubble)},
        {"motion", optional_to_json(s.motion)},
        {"speaker", s.speaker},
        {"seq", s.seq},
    };
}

void from_json(const nlohmann::json& j, CaptionSpec& s) {
    s.id = j.at("id").get<std::string>();
    s.word = j.at("word").get<std::string>();
    const auto& c = j.at("color");
    if (!c.is_array() || c.size() != 3) {
        throw std::invalid_argument("color must be a 3-element array");
    }
    s.color = Rgb{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    s.size = parse_enum(j.at("size"), sizes, "size");
    s.typeface = parse_enum(j.at("typeface"), typefaces, "typeface");
    s.emoji = parse_optional(j, "emoji", emojis);
    if (auto it = j.find("ornament"); it != j.end() && !it->is_null()) {
        s.ornament = it->get<std::string>();
    } else {
        s.ornament.reset();
    }
    s.bubble = parse_optional(j, "bubble", bubbles);
    s.motion = parse_optional(j, "motion", motions);
    s.speaker = j.at("speaker").get<std::string>();
    s.seq = j.at("seq").get<std::uint64_t>();
}

}  // namespace capkit
