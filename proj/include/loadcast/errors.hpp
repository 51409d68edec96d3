#pragma once

#include <stdexcept>
#include <string>

namespace loadcast {

// Error taxonomy mirrors the CLI exit codes: usage (1), data (2), solve/train (3).
enum class ErrorKind { usage, data, solve };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& m) : Error(ErrorKind::usage, m) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& m) : Error(ErrorKind::data, m) {}
};

class SolveError : public Error {
public:
    explicit SolveError(const std::string& m) : Error(ErrorKind::solve, m) {}
};

}  // namespace loadcast
