#include "hwv/core.hpp"

namespace hwv
{

char tri_char( Tri t ) noexcept
{
    switch ( t )
    {
    case Tri::zero: return '0';
    case Tri::one: return '1';
    default: return 'x';
    }
}

Tri tri_not( Tri a ) noexcept
{
    if ( a == Tri::x )
        return Tri::x;
    return a == Tri::one ? Tri::zero : Tri::one;
}

Tri tri_and( Tri a, Tri b ) noexcept
{
    if ( a == Tri::zero || b == Tri::zero )
        return Tri::zero;
    if ( a == Tri::one && b == Tri::one )
        return Tri::one;
    return Tri::x;
}

Tri tri_or( Tri a, Tri b ) noexcept
{
    if ( a == Tri::one || b == Tri::one )
        return Tri::one;
    if ( a == Tri::zero && b == Tri::zero )
        return Tri::zero;
    return Tri::x;
}

Tri tri_xor( Tri a, Tri b ) noexcept
{
    if ( a == Tri::x || b == Tri::x )
        return Tri::x;
    return tri_of( a != b );
}

Tri tri_mux( Tri sel, Tri a, Tri b ) noexcept
{
    if ( sel == Tri::zero )
        return a;
    if ( sel == Tri::one )
        return b;
    return a == b ? a : Tri::x;
}

std::string_view error_code_name( ErrorCode code ) noexcept
{
    switch ( code )
    {
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::unknown_signal: return "UnknownSignal";
    case ErrorCode::unknown_module: return "UnknownModule";
    case ErrorCode::unknown_register: return "UnknownRegister";
    case ErrorCode::unknown_instance: return "UnknownInstance";
    case ErrorCode::duplicate_address: return "DuplicateAddress";
    case ErrorCode::duplicate_name: return "DuplicateName";
    case ErrorCode::width_overflow: return "WidthOverflow";
    case ErrorCode::width_mismatch: return "WidthMismatch";
    case ErrorCode::combinational_loop: return "CombinationalLoop";
    case ErrorCode::multiple_drivers: return "MultipleDrivers";
    case ErrorCode::undriven_net: return "UndrivenNet";
    case ErrorCode::unresolvable_scope: return "UnresolvableScope";
    case ErrorCode::missing_stopat: return "MissingStopat";
    case ErrorCode::exhausted_registers: return "ExhaustedRegisters";
    case ErrorCode::io_error: return "IoError";
    }
    return "Error";
}

namespace
{

std::string decorate( ErrorCode code, const std::string& message, const std::string& file, unsigned line,
                      unsigned column )
{
    auto text = std::string{ error_code_name( code ) };
    if ( !file.empty() )
        text += " in " + file;
    if ( line != 0 )
        text += " at " + std::to_string( line ) + ":" + std::to_string( column );
    return text + ": " + message;
}

} // namespace

Error::Error( ErrorCode code, const std::string& message, unsigned line, unsigned column )
    : std::runtime_error( decorate( code, message, {}, line, column ) ), code_( code ), message_( message ),
      line_( line ), column_( column )
{
}

Error Error::in_file( const std::string& file ) const
{
    auto e = Error{ code_, message_, line_, column_ };
    e.file_ = file;
    static_cast< std::runtime_error& >( e ) = std::runtime_error( decorate( code_, message_, file, line_, column_ ) );
    return e;
}

} // namespace hwv
