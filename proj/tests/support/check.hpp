#pragma once

#include "lexcraft/error.hpp"

#include <optional>
#include <ostream>

namespace lexcraft {

inline std::ostream& operator<<(std::ostream& os, ErrorCode code)
{
    return os << to_string(code);
}

/// Code of the lexcraft::Error thrown by f, or nullopt if it returns.
template <typename F>
std::optional<ErrorCode> error_code(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace lexcraft
