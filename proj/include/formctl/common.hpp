#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace formctl {

/// Invalid scenario configuration or schema violation. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during simulation (divergence, singular input matrix).
/// CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure writing output artifacts. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

/// Verbosity from the FORMCTL_LOG environment variable ("quiet", "info", "debug").
inline LogLevel log_level() {
    const char* env = std::getenv("FORMCTL_LOG");
    if (!env) return LogLevel::Quiet;
    std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Quiet;
}

} // namespace formctl
