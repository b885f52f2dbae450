#ifndef CAPKIT_LOGGING_HPP
#define CAPKIT_LOGGING_HPP

#include <optional>
#include <string>
#include <string_view>

namespace capkit {

/// Routes library logging to stderr at the level named by `level`, or by the
/// CAPKIT_LOG environment variable when `level` is empty. Accepted names:
/// trace, debug, info, warn, error, off. Default: warn.
/// Throws std::invalid_argument for an unknown name.
void init_logging(std::optional<std::string_view> level = std::nullopt);

}  // namespace capkit

#endif  // CAPKIT_LOGGING_HPP
