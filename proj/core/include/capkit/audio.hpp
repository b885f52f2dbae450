#ifndef CAPKIT_AUDIO_HPP
#define CAPKIT_AUDIO_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capkit::audio {

/// Loudness of digital silence.
inline constexpr double silence_dbfs = -std::numeric_limits<double>::infinity();

/// 16-bit full scale used as the dBFS reference.
inline constexpr double full_scale = 32768.0;

class AudioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AudioFragment {
    std::uint64_t seq = 0;
    std::vector<std::int16_t> samples;
    std::uint32_t sample_rate = 16000;
    std::uint32_t duration_ms = 1000;
};

struct Transcript {
    std::uint64_t seq = 0;
    std::string text;
    double dbfs = silence_dbfs;
    /// Set when the transcriber failed on this fragment and the text was
    /// replaced by an empty string.
    std::optional<std::string> warning;

    friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct PipelineConfig {
    std::uint32_t chunk_ms = 1000;
    unsigned workers = 4;
    std::uint32_t sample_rate = 16000;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Splits a mono PCM stream into fixed-duration fragments numbered 0,1,2,...
/// The final fragment may be shorter than the chunk.
std::vector<AudioFragment> chunk_stream(std::span<const std::int16_t> pcm,
                                        const PipelineConfig& cfg);

/// RMS level against 16-bit full scale, in dB. All-zero input gives
/// silence_dbfs. Throws std::invalid_argument on empty input.
double compute_dbfs(std::span<const std::int16_t> samples);
double compute_dbfs(const AudioFragment& fragment);

/// Speech-to-text backend. transcribe() is called concurrently from pool
/// threads. Implementations may throw to signal failure on a
/// fragment; the ordered pipeline absorbs the error.
class Transcriber {
public:
    virtual ~Transcriber() = default;
    virtual std::string transcribe(const AudioFragment& fragment) = 0;
};

/// Deterministic offline backend: fragment seq N yields line N of a script,
/// or empty text past the end of the script.
class ScriptedTranscriber final : public Transcriber {
public:
    explicit ScriptedTranscriber(std::vector<std::string> lines);
    static ScriptedTranscriber from_file(const std::string& path);

    std::string transcribe(const AudioFragment& fragment) override;

private:
    std::vector<std::string> lines_;
};

/// Runs the transcriber over `fragments` with at most cfg.workers calls in
/// flight and returns transcripts in seq order. Each transcript is emitted to
/// `on_ready` (if given) as soon as every lower seq has been emitted.
std::vector<Transcript> transcribe_ordered(
    std::span<const AudioFragment> fragments, Transcriber& transcriber,
    const PipelineConfig& cfg,
    const std::function<void(const Transcript&)>& on_ready = {});

/// Expected delay between a word being spoken and its text becoming
/// available.
double estimate_latency(double chunk_ms, double mean_process_ms,
                        double mean_queue_wait_ms);

/// True when `text` has no letters or digits (e.g. "..." or "?!").
bool is_punctuation_only(std::string_view text);

}  // namespace capkit::audio

#endif  // CAPKIT_AUDIO_HPP
