#ifndef CAPKIT_WAV_HPP
#define CAPKIT_WAV_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace capkit::audio {

/// Raised for anything other than RIFF/WAVE, PCM, 16-bit, mono.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PcmAudio {
    std::uint32_t sample_rate = 16000;
    std::vector<std::int16_t> samples;
};

PcmAudio parse_wav(std::span<const std::byte> bytes);
PcmAudio read_wav(const std::string& path);

std::vector<std::byte> encode_wav(const PcmAudio& audio);
void write_wav(const std::string& path, const PcmAudio& audio);

}  // namespace capkit::audio

#endif  // CAPKIT_WAV_HPP
