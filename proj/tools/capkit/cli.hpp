#ifndef CAPKIT_TOOLS_CLI_HPP
#define CAPKIT_TOOLS_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "capkit/audio.hpp"
#include "capkit/sim.hpp"

namespace capkit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

/// A bad configuration value. The message starts with the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Every tunable, flat, keyed by the snake_case field name. Loaded from a JSON
/// config file; command-line flags override individual keys.
struct RunConfig {
    audio::PipelineConfig pipeline;
    sim::SimConfig sim;
    std::string bind = "127.0.0.1:8765";
    std::uint64_t resync_ticks = 90;
    std::uint64_t seed = 0;
    std::string lexicon_dir;  // empty: bundled lexicons
    std::string log_level;    // empty: CAPKIT_LOG or warn

    /// Applies keys from a JSON object on top of the current values.
    /// Throws ConfigError naming the first unknown or ill-typed key.
    void merge(const nlohmann::json& j);
    /// Throws ConfigError naming the offending key.
    void validate() const;
    nlohmann::json to_json() const;

    static RunConfig from_file(const std::filesystem::path& path);
};

/// Splits "host:port". Throws ConfigError("bind", ...) when malformed.
std::pair<std::string, std::uint16_t> parse_bind(const std::string& bind);

/// Runs the capkit command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace capkit::cli

#endif  // CAPKIT_TOOLS_CLI_HPP
