#include "capkit/audio.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace capkit::audio {

void PipelineConfig::validate() const {
    if (chunk_ms < 100) {
        throw std::invalid_argument("chunk_ms must be >= 100");
    }
    if (workers < 1) {
        throw std::invalid_argument("workers must be >= 1");
    }
    if (sample_rate == 0) {
        throw std::invalid_argument("sample_rate must be > 0");
    }
}

std::vector<AudioFragment> chunk_stream(std::span<const std::int16_t> pcm,
                                        const PipelineConfig& cfg) {
    cfg.validate();
    if (pcm.empty()) {
        throw AudioError("empty stream");
    }
    const std::size_t per_chunk =
        static_cast<std::size_t>(cfg.sample_rate) * cfg.chunk_ms / 1000;
    if (per_chunk == 0) {
        throw std::invalid_argument("chunk_ms too short for sample_rate");
    }

    std::vector<AudioFragment> out;
    out.reserve((pcm.size() + per_chunk - 1) / per_chunk);
    for (std::size_t begin = 0; begin < pcm.size(); begin += per_chunk) {
        const std::size_t n = std::min(per_chunk, pcm.size() - begin);
        AudioFragment f;
        f.seq = out.size();
        f.samples.assign(pcm.begin() + static_cast<std::ptrdiff_t>(begin),
                         pcm.begin() + static_cast<std::ptrdiff_t>(begin + n));
        f.sample_rate = cfg.sample_rate;
        f.duration_ms = n == per_chunk
                            ? cfg.chunk_ms
                            : static_cast<std::uint32_t>(n * 1000 / cfg.sample_rate);
        out.push_back(std::move(f));
    }
    return out;
}

double compute_dbfs(std::span<const std::int16_t> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("compute_dbfs: no samples");
    }
    long double sum_sq = 0.0L;
    for (std::int16_t s : samples) {
        const long double v = s;
        sum_sq += v * v;
    }
    if (sum_sq == 0.0L) {
        return silence_dbfs;
    }
    const double rms =
        std::sqrt(static_cast<double>(sum_sq / static_cast<long double>(samples.size())));
    return 20.0 * std::log10(rms / full_scale);
}

double compute_dbfs(const AudioFragment& fragment) {
    return compute_dbfs(std::span<const std::int16_t>(fragment.samples));
}

ScriptedTranscriber::ScriptedTranscriber(std::vector<std::string> lines)
    : lines_(std::move(lines)) {}

ScriptedTranscriber ScriptedTranscriber::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw AudioError("cannot open transcriber script: " + path);
    }
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return ScriptedTranscriber(std::move(lines));
}

std::string ScriptedTranscriber::transcribe(const AudioFragment& fragment) {
    if (fragment.seq < lines_.size()) {
        return lines_[fragment.seq];
    }
    return {};
}

bool is_punctuation_only(std::string_view text) {
    return std::none_of(text.begin(), text.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        // Any non-ASCII byte is treated as word content.
        return u >= 0x80 || std::isalnum(u) != 0;
    });
}

std::vector<Transcript> transcribe_ordered(
    std::span<const AudioFragment> fragments, Transcriber& transcriber,
    const PipelineConfig& cfg,
    const std::function<void(const Transcript&)>& on_ready) {
    cfg.validate();
    std::vector<Transcript> out;
    if (fragments.empty()) {
        return out;
    }
    out.reserve(fragments.size());

    std::atomic<std::size_t> next_index{0};
    std::mutex mu;
    std::map<std::uint64_t, Transcript> pending;  // reorder buffer
    std::uint64_t next_seq = fragments.front().seq;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_index.fetch_add(1);
            if (i >= fragments.size()) {
                return;
            }
            const AudioFragment& frag = fragments[i];
            Transcript t;
            t.seq = frag.seq;
            try {
                t.text = transcriber.transcribe(frag);
                if (is_punctuation_only(t.text)) {
                    t.text.clear();
                }
            } catch (const std::exception& e) {
                t.text.clear();
                t.warning = std::string("transcriber failed: ") + e.what();
            } catch (...) {
                t.text.clear();
                t.warning = "transcriber failed";
            }
            t.dbfs = frag.samples.empty() ? silence_dbfs : compute_dbfs(frag);

            std::lock_guard lock(mu);
            pending.emplace(t.seq, std::move(t));
            for (auto it = pending.find(next_seq); it != pending.end();
                 it = pending.find(next_seq)) {
                if (on_ready) {
                    on_ready(it->second);
                }
                out.push_back(std::move(it->second));
                pending.erase(it);
                ++next_seq;
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(cfg.workers, fragments.size());
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) {
        pool.emplace_back(worker);
    }
    pool.clear();

    // Non-contiguous seq input leaves gaps the buffer can never fill; flush
    // what remains in seq order.
    for (auto& [seq, t] : pending) {
        if (on_ready) {
            on_ready(t);
        }
        out.push_back(std::move(t));
    }
    return out;
}

double estimate_latency(double chunk_ms, double mean_process_ms,
                        double mean_queue_wait_ms) {
    if (chunk_ms < 0 || mean_process_ms < 0 || mean_queue_wait_ms < 0) {
        throw std::invalid_argument("estimate_latency: negative input");
    }
    return chunk_ms + mean_process_ms + mean_queue_wait_ms;
}

}  // namespace capkit::audio
