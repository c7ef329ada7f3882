#pragma once

// Error hierarchy shared by every contrail module. The CLI maps these to
// process exit codes: validation -> 1, training/runtime -> 2, I/O -> 3.

#include <stdexcept>
#include <string>

namespace contrail {

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct LookupError : std::runtime_error {
    explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

struct StateError : std::runtime_error {
    explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainingError : std::runtime_error {
    TrainingError(const std::string& what, long at_epoch)
        : std::runtime_error(what), epoch(at_epoch) {}
    long epoch;
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace contrail
