#pragma once

#include <stdexcept>
#include <string>

namespace rrnum {

// Mirrors rrnum_status in the public C header; keep the two in sync.
enum class ErrorCode {
    InvalidArgument = 1,
    Config = 2,
    CapExceeded = 3,
    Feasibility = 4,
    NonConcave = 5,
    Io = 6,
    Numeric = 7,
    Internal = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what)
{
    if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace rrnum
