#pragma once

#include <stdexcept>
#include <string>

namespace crlr {

// Error taxonomy shared by the library and the CLI. Each class maps to a
// distinct process exit code (see tools/).

struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown by the synthetic generator when biased selection rejects every
// pool sample (or cannot reach a requested size).
struct generation_error : std::runtime_error {
    explicit generation_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace crlr
