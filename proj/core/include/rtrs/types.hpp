#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rtrs {

using Seconds = std::int64_t;
using LocationId = std::int32_t;
using ZoneId = std::int32_t;
using RequestId = std::int32_t;
using VehicleId = std::int32_t;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the demand history cannot support a forecast; the engine
/// falls back to myopic operation.
class ForecastUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rtrs
