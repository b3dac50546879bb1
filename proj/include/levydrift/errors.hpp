#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace levydrift {

enum class ErrorKind {
    invalid_argument,
    unsupported,
    io,
    divergence,
    degenerate_data,
    degenerate_diffusion,
    singularity,
    evaluation,
    unavailable,
    experiment_failed,
};

// Library-wide exception. `index` carries the offending step or observation
// index when one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), kind_(kind), index_(index) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

    // Bad input from the caller (as opposed to a numerical failure on valid input).
    bool is_user_error() const noexcept {
        return kind_ == ErrorKind::invalid_argument || kind_ == ErrorKind::unsupported ||
               kind_ == ErrorKind::io;
    }

private:
    ErrorKind kind_;
    std::optional<std::size_t> index_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what,
                              std::optional<std::size_t> index = std::nullopt) {
    throw Error(kind, what, index);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::invalid_argument, what);
}

}  // namespace levydrift
