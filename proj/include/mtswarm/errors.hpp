#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mtswarm {

/// Bad configuration value or key. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Integration blow-up (non-finite force or runaway displacement).
class NumericError : public std::runtime_error {
public:
    NumericError(std::uint64_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

/// Malformed or truncated input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A filament collapsed so that a local tangent is undefined.
class DegenerateFilament : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mtswarm
