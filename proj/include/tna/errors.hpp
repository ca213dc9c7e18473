#pragma once

#include <stdexcept>
#include <string>

namespace tna {

// Invalid or inconsistent configuration values (bad widths, ratios out of
// range, malformed config files).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent dataset content (bad magic numbers, truncated
// payloads, shape mismatches, label range violations).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values produced during numeric computation; the message carries
// enough context to locate the failing stage.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem and network failures (unreadable files, checksum mismatches,
// failed downloads).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tna
