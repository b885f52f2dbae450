#include "capkit/logging.hpp"

#include <array>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <utility>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace capkit {

void init_logging(std::optional<std::string_view> level) {
    constexpr std::array<std::pair<std::string_view, spdlog::level::level_enum>, 7> kLevels{{
        {"trace", spdlog::level::trace},
        {"debug", spdlog::level::debug},
        {"info", spdlog::level::info},
        {"warn", spdlog::level::warn},
        {"warning", spdlog::level::warn},
        {"error", spdlog::level::err},
        {"off", spdlog::level::off},
    }};

    std::string_view name = "warn";
    if (level) {
        name = *level;
    } else if (const char* env = std::getenv("CAPKIT_LOG"); env != nullptr && *env != '\0') {
        name = env;
    }

    auto lvl = spdlog::level::warn;
    bool found = false;
    for (const auto& [n, l] : kLevels) {
        if (n == name) {
            lvl = l;
            found = true;
        }
    }
    if (!found) {
        throw std::invalid_argument("CAPKIT_LOG: unknown log level '" + std::string(name) + "'");
    }

    auto logger = std::make_shared<spdlog::logger>(
        "capkit", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(lvl);
}

}  // namespace capkit
