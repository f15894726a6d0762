#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bodyctl {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed wire record. `line()` is 1-based when the record came from a file, 0 otherwise.
class ParseError : public Error
{
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Configuration validation failure; `path()` points into the document (e.g. "mappings[2].out_range").
class ConfigError : public Error
{
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path))
    {
    }

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class TimestampError : public Error
{
public:
    using Error::Error;
};

} // namespace bodyctl
