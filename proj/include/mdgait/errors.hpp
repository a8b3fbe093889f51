#pragma once

#include <stdexcept>
#include <string>

namespace mdgait {

// The caller asked for something impossible: bad parameters, malformed config.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The request was well-formed but the data cannot support it: short signals,
// missing gait periodicity, corrupt or truncated files.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mdgait
