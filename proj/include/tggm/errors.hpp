#pragma once

#include <stdexcept>
#include <string>

namespace tggm {

// Error categories map onto the CLI exit codes: config -> 1, data -> 2,
// numerical -> 3. Anything else escaping main is a bug.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tggm
