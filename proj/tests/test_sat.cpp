#include "hwv/core.hpp"
#include "hwv/sat.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace hwv;

namespace
{

Cnf random_3sat( std::mt19937_64& rng, int vars, double ratio )
{
    auto cnf = Cnf{ vars, {} };
    auto clauses = static_cast< int >( vars * ratio + 0.5 );
    for ( int c = 0; c < clauses; ++c )
    {
        auto clause = std::vector< int >{};
        for ( int k = 0; k < 3; ++k )
        {
            auto v = 1 + static_cast< int >( rng() % static_cast< unsigned >( vars ) );
            clause.push_back( ( rng() & 1u ) ? v : -v );
        }
        cnf.clauses.push_back( clause );
    }
    return cnf;
}

// n+1 pigeons into n holes.
Cnf pigeonhole( int n )
{
    auto var = [n]( int p, int h ) { return p * n + h + 1; };
    auto cnf = Cnf{ ( n + 1 ) * n, {} };
    for ( int p = 0; p <= n; ++p )
    {
        auto clause = std::vector< int >{};
        for ( int h = 0; h < n; ++h )
            clause.push_back( var( p, h ) );
        cnf.clauses.push_back( clause );
    }
    for ( int h = 0; h < n; ++h )
    {
        for ( int p = 0; p <= n; ++p )
        {
            for ( int q = p + 1; q <= n; ++q )
                cnf.clauses.push_back( { -var( p, h ), -var( q, h ) } );
        }
    }
    return cnf;
}

} // namespace

TEST_CASE( "random 3-SAT near the threshold agrees with a truth table" )
{
    auto rng = std::mt19937_64{ 2024 };
    auto sat = 0;
    auto unsat = 0;
    for ( int i = 0; i < 200; ++i )
    {
        auto cnf = random_3sat( rng, 8 + static_cast< int >( rng() % 9 ), 4.26 );
        auto expected = oracle::truth_table_sat( cnf );
        auto out = solve( cnf, {}, 1e9, 1 + static_cast< std::uint64_t >( i ) );
        REQUIRE( out.status != SolveStatus::timeout );
        CHECK( ( out.status == SolveStatus::sat ) == expected );
        if ( out.status == SolveStatus::sat )
        {
            CHECK( satisfies( cnf, out.model ) );
            ++sat;
        }
        else
        {
            ++unsat;
        }
    }
    // Near the threshold both answers are common.
    CHECK( sat > 20 );
    CHECK( unsat > 20 );
}

TEST_CASE( "pigeonhole instances are unsatisfiable" )
{
    for ( int n = 2; n <= 6; ++n )
        CHECK( solve( pigeonhole( n ) ).status == SolveStatus::unsat );
}

TEST_CASE( "assumptions hold for one call only" )
{
    auto s = Solver{};
    auto a = s.new_var();
    auto b = s.new_var();
    s.add_clause( { a, b } );
    s.add_clause( { -a, b } );
    CHECK( s.solve() == SolveStatus::sat );
    CHECK( s.value( b ) );

    auto not_b = std::vector< int >{ -b };
    CHECK( s.solve( not_b ) == SolveStatus::unsat );
    CHECK( s.solve() == SolveStatus::sat );

    // Clauses added after a solve are kept.
    s.add_clause( { -b, -a } );
    CHECK( s.solve() == SolveStatus::sat );
    CHECK_FALSE( s.value( a ) );
    CHECK_FALSE( s.add_clause( { -b } ) );
    CHECK( s.solve() == SolveStatus::unsat );
}

TEST_CASE( "empty clause and trivially satisfiable inputs" )
{
    CHECK( solve( Cnf{ 0, {} } ).status == SolveStatus::sat );
    CHECK( solve( Cnf{ 2, { {} } } ).status == SolveStatus::unsat );
    auto out = solve( Cnf{ 3, { { 1 }, { -1, 2 }, { -2, -3 } } } );
    REQUIRE( out.status == SolveStatus::sat );
    CHECK( out.model[ 1 ] );
    CHECK( out.model[ 2 ] );
    CHECK_FALSE( out.model[ 3 ] );
}

TEST_CASE( "a passed deadline yields a timeout" )
{
    auto s = Solver{};
    auto cnf = pigeonhole( 9 );
    for ( int v = 0; v < cnf.num_vars; ++v )
        s.new_var();
    for ( const auto& c : cnf.clauses )
        s.add_clause( c );
    CHECK( s.solve( {}, Clock::now() ) == SolveStatus::timeout );
    CHECK( solve( cnf, {}, 0.05 ).status == SolveStatus::timeout );
}

TEST_CASE( "DIMACS round-trips and rejects malformed input" )
{
    auto rng = std::mt19937_64{ 5 };
    auto cnf = random_3sat( rng, 12, 3.0 );
    CHECK( import_dimacs( export_dimacs( cnf ) ) == cnf );
    CHECK( import_dimacs( "c comment\np cnf 2 2\n1 -2 0\n2\n0\n" ) == Cnf{ 2, { { 1, -2 }, { 2 } } } );

    auto line_of = []( const char* text ) {
        try
        {
            import_dimacs( text );
        }
        catch ( const Error& e )
        {
            CHECK( e.code() == ErrorCode::syntax_error );
            return e.line();
        }
        return 0u;
    };
    CHECK( line_of( "1 2 0\n" ) == 1 );
    CHECK( line_of( "p cnf 2 1\n1 3 0\n" ) == 2 );
    CHECK( line_of( "p cnf 2 1\n1 x 0\n" ) == 2 );
    CHECK( line_of( "p cnf 2 2\n1 0\n" ) > 0 );
}
