#include "hwv/core.hpp"

#include <doctest.h>

#include <array>

using namespace hwv;

namespace
{

constexpr auto all = std::array{ Tri::zero, Tri::one, Tri::x };

// Pessimistic value of a 2-input function: known only when every
// completion of the X inputs agrees.
template < typename F >
Tri reference( F f, Tri a, Tri b )
{
    auto seen0 = false;
    auto seen1 = false;
    for ( int va = 0; va < 2; ++va )
    {
        if ( is_known( a ) && ( a == Tri::one ) != ( va == 1 ) )
            continue;
        for ( int vb = 0; vb < 2; ++vb )
        {
            if ( is_known( b ) && ( b == Tri::one ) != ( vb == 1 ) )
                continue;
            ( f( va == 1, vb == 1 ) ? seen1 : seen0 ) = true;
        }
    }
    return seen0 && seen1 ? Tri::x : tri_of( seen1 );
}

} // namespace

TEST_CASE( "three-valued AND and OR are the exact X abstractions" )
{
    for ( auto a : all )
    {
        for ( auto b : all )
        {
            CHECK( tri_and( a, b ) == reference( []( bool x, bool y ) { return x && y; }, a, b ) );
            CHECK( tri_or( a, b ) == reference( []( bool x, bool y ) { return x || y; }, a, b ) );
            CHECK( tri_xor( a, b ) == reference( []( bool x, bool y ) { return x != y; }, a, b ) );
        }
    }
}

TEST_CASE( "three-valued MUX resolves an X select only when both data agree" )
{
    CHECK( tri_mux( Tri::zero, Tri::one, Tri::zero ) == Tri::one );
    CHECK( tri_mux( Tri::one, Tri::one, Tri::zero ) == Tri::zero );
    CHECK( tri_mux( Tri::x, Tri::one, Tri::one ) == Tri::one );
    CHECK( tri_mux( Tri::x, Tri::zero, Tri::zero ) == Tri::zero );
    CHECK( tri_mux( Tri::x, Tri::one, Tri::zero ) == Tri::x );
    CHECK( tri_mux( Tri::x, Tri::x, Tri::x ) == Tri::x );
    CHECK( tri_not( Tri::x ) == Tri::x );
    CHECK( tri_not( Tri::zero ) == Tri::one );
}

TEST_CASE( "errors carry code, position and file" )
{
    auto e = Error( ErrorCode::syntax_error, "bad token", 3, 7 );
    CHECK( e.code() == ErrorCode::syntax_error );
    CHECK( e.line() == 3 );
    CHECK( e.column() == 7 );
    CHECK( std::string{ e.what() } == "SyntaxError at 3:7: bad token" );
    auto f = e.in_file( "a.net" );
    CHECK( f.file() == "a.net" );
    CHECK( f.line() == 3 );
    CHECK( std::string{ f.what() } == "SyntaxError in a.net at 3:7: bad token" );
    CHECK( error_code_name( ErrorCode::exhausted_registers ) == "ExhaustedRegisters" );
}
