#pragma once

#include <stdexcept>
#include <string>

namespace interp {

struct DimMismatchError : std::invalid_argument {
    explicit DimMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

struct NonFiniteError : std::invalid_argument {
    explicit NonFiniteError(const std::string& what) : std::invalid_argument(what) {}
};

struct RankDeficientError : std::runtime_error {
    explicit RankDeficientError(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidRegimeError : std::invalid_argument {
    explicit InvalidRegimeError(const std::string& what) : std::invalid_argument(what) {}
};

struct ZeroSignalError : std::invalid_argument {
    explicit ZeroSignalError(const std::string& what) : std::invalid_argument(what) {}
};

struct EmptyPairError : std::runtime_error {
    explicit EmptyPairError(const std::string& what) : std::runtime_error(what) {}
};

struct MissingColumnError : std::runtime_error {
    explicit MissingColumnError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace interp
