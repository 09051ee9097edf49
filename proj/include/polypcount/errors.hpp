#pragma once

#include <stdexcept>
#include <string>

namespace polypcount {

// Invalid configuration: bad hyperparameter bounds, malformed run config,
// contradictory options. Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or inconsistent data: parse failures, coverage mismatches,
// degenerate annotations. Maps to exit code 3 in the CLI.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace polypcount
