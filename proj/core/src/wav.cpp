#include "capkit/wav.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

namespace capkit::audio {
namespace {

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) |
           (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::byte> b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[at]) |
                                      (static_cast<std::uint16_t>(b[at + 1]) << 8));
}

bool tag_is(std::span<const std::byte> b, std::size_t at, std::string_view tag) {
    return std::memcmp(b.data() + at, tag.data(), 4) == 0;
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
}

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xFF));
    out.push_back(static_cast<std::byte>(v >> 8));
}

void put_tag(std::vector<std::byte>& out, std::string_view tag) {
    for (char c : tag) {
        out.push_back(static_cast<std::byte>(c));
    }
}

}  // namespace

PcmAudio parse_wav(std::span<const std::byte> bytes) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw FormatError("not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    PcmAudio audio;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) {
            throw FormatError("truncated chunk");
        }
        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16) {
                throw FormatError("fmt chunk too short");
            }
            const std::uint16_t format = read_u16(bytes, body);
            const std::uint16_t channels = read_u16(bytes, body + 2);
            const std::uint32_t rate = read_u32(bytes, body + 4);
            const std::uint16_t bits = read_u16(bytes, body + 14);
            if (format != 1) {
                throw FormatError("unsupported WAV encoding (need PCM)");
            }
            if (channels != 1) {
                throw FormatError("unsupported channel count (need mono)");
            }
            if (bits != 16) {
                throw FormatError("unsupported bit depth (need 16-bit)");
            }
            if (rate == 0) {
                throw FormatError("sample rate is zero");
            }
            audio.sample_rate = rate;
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (!have_fmt) {
                throw FormatError("data chunk before fmt chunk");
            }
            audio.samples.resize(size / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i) {
                audio.samples[i] = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
            }
            return audio;
        }
        // Chunks are padded to even sizes.
        pos = body + size + (size & 1U);
    }
    throw FormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

PcmAudio read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path);
    }
    std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    return parse_wav(std::as_bytes(std::span<const char>(raw)));
}

std::vector<std::byte> encode_wav(const PcmAudio& audio) {
    const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
    std::vector<std::byte> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_size);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, audio.sample_rate);
    put_u32(out, audio.sample_rate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_size);
    for (std::int16_t s : audio.samples) {
        put_u16(out, static_cast<std::uint16_t>(s));
    }
    return out;
}

void write_wav(const std::string& path, const PcmAudio& audio) {
    const auto bytes = encode_wav(audio);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot write " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace capkit::audio
