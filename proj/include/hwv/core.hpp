#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hwv
{

using NetId = std::uint32_t;
inline constexpr NetId no_net = std::numeric_limits< NetId >::max();

/// Three-valued logic value. X is the only value that can be refined.
enum class Tri : std::uint8_t
{
    zero,
    one,
    x
};

constexpr Tri tri_of( bool b ) noexcept { return b ? Tri::one : Tri::zero; }
constexpr bool is_known( Tri t ) noexcept { return t != Tri::x; }
char tri_char( Tri t ) noexcept;

Tri tri_not( Tri a ) noexcept;
Tri tri_and( Tri a, Tri b ) noexcept;
Tri tri_or( Tri a, Tri b ) noexcept;
Tri tri_xor( Tri a, Tri b ) noexcept;
/// sel = 0 selects a, sel = 1 selects b; an unknown select is known only
/// when both data inputs agree.
Tri tri_mux( Tri sel, Tri a, Tri b ) noexcept;

enum class ErrorCode
{
    syntax_error,
    unknown_signal,
    unknown_module,
    unknown_register,
    unknown_instance,
    duplicate_address,
    duplicate_name,
    width_overflow,
    width_mismatch,
    combinational_loop,
    multiple_drivers,
    undriven_net,
    unresolvable_scope,
    missing_stopat,
    exhausted_registers,
    io_error
};

std::string_view error_code_name( ErrorCode code ) noexcept;

/// Every recoverable failure in the library. Parse errors carry a 1-based
/// line and column; other errors leave them at zero.
class Error : public std::runtime_error
{
public:
    Error( ErrorCode code, const std::string& message, unsigned line = 0, unsigned column = 0 );

    ErrorCode code() const noexcept { return code_; }
    unsigned line() const noexcept { return line_; }
    unsigned column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }
    const std::string& file() const noexcept { return file_; }

    /// The same error attributed to `file`.
    Error in_file( const std::string& file ) const;

private:
    ErrorCode code_;
    std::string message_;
    std::string file_;
    unsigned line_;
    unsigned column_;
};

} // namespace hwv
