#pragma once

#include <stdexcept>
#include <string>

namespace campmon {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent configuration / scenario input.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Filesystem failure, carries the offending path in the message.
class IoError : public Error {
public:
    IoError(const std::string& msg, const std::string& path)
        : Error(msg + ": " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace campmon
