#include "hwv/core.hpp"
#include "hwv/sat.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace hwv
{

std::string export_dimacs( const Cnf& cnf )
{
    auto out = std::ostringstream{};
    out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
    for ( const auto& c : cnf.clauses )
    {
        for ( auto l : c )
            out << l << " ";
        out << "0\n";
    }
    return out.str();
}

Cnf import_dimacs( std::string_view text )
{
    auto cnf = Cnf{};
    auto header_seen = false;
    auto declared_clauses = std::size_t{ 0 };
    auto current = std::vector< int >{};
    auto line_no = 0u;
    auto in = std::istringstream{ std::string{ text } };
    auto line = std::string{};
    while ( std::getline( in, line ) )
    {
        ++line_no;
        auto first = line.find_first_not_of( " \t\r" );
        if ( first == std::string::npos || line[ first ] == 'c' || line[ first ] == '%' )
            continue;
        auto tokens = std::istringstream{ line };
        if ( line[ first ] == 'p' )
        {
            auto p = std::string{};
            auto format = std::string{};
            long long vars = -1;
            long long count = -1;
            auto rest = std::string{};
            if ( header_seen || !( tokens >> p >> format >> vars >> count ) || p != "p" || format != "cnf" || vars < 0 ||
                 count < 0 || vars > 100000000 || ( tokens >> rest ) )
                throw Error( ErrorCode::syntax_error, "malformed DIMACS header", line_no, static_cast< unsigned >( first + 1 ) );
            header_seen = true;
            cnf.num_vars = static_cast< int >( vars );
            declared_clauses = static_cast< std::size_t >( count );
            continue;
        }
        if ( !header_seen )
            throw Error( ErrorCode::syntax_error, "clause before DIMACS header", line_no, static_cast< unsigned >( first + 1 ) );
        auto word = std::string{};
        while ( tokens >> word )
        {
            auto lit = 0LL;
            auto pos = std::size_t{ 0 };
            try
            {
                lit = std::stoll( word, &pos );
            }
            catch ( const std::exception& )
            {
                pos = 0;
            }
            if ( pos != word.size() || std::llabs( lit ) > cnf.num_vars )
                throw Error( ErrorCode::syntax_error, "bad literal '" + word + "'", line_no, 1 );
            if ( lit == 0 )
            {
                cnf.clauses.push_back( std::move( current ) );
                current.clear();
            }
            else
            {
                current.push_back( static_cast< int >( lit ) );
            }
        }
    }
    if ( !header_seen )
        throw Error( ErrorCode::syntax_error, "missing DIMACS header", line_no == 0 ? 1 : line_no, 1 );
    if ( !current.empty() )
        throw Error( ErrorCode::syntax_error, "unterminated clause", line_no, 1 );
    if ( cnf.clauses.size() != declared_clauses )
        throw Error( ErrorCode::syntax_error, "header declares " + std::to_string( declared_clauses ) + " clauses, found " +
                                                  std::to_string( cnf.clauses.size() ),
                     line_no, 1 );
    return cnf;
}

SolveOutcome solve_external( const Cnf& cnf, std::span< const int > assumptions, const std::string& command, double budget )
{
    auto start = Clock::now();
    auto full = cnf;
    for ( auto a : assumptions )
        full.clauses.push_back( { a } );

    auto path = std::filesystem::temp_directory_path() /
                ( "hwv_" + std::to_string( ::getpid() ) + "_" + std::to_string( start.time_since_epoch().count() ) + ".cnf" );
    {
        auto file = std::ofstream{ path };
        file << export_dimacs( full );
    }
    auto seconds = std::max( 1LL, static_cast< long long >( budget + 0.999 ) );
    auto cmd = "timeout " + std::to_string( seconds ) + " " + command + " '" + path.string() + "' 2>/dev/null";
    auto output = std::string{};
    if ( auto* pipe = ::popen( cmd.c_str(), "r" ); pipe != nullptr )
    {
        char buffer[ 4096 ];
        std::size_t n = 0;
        while ( ( n = std::fread( buffer, 1, sizeof buffer, pipe ) ) > 0 )
            output.append( buffer, n );
        ::pclose( pipe );
    }
    std::filesystem::remove( path );

    auto outcome = SolveOutcome{};
    outcome.status = SolveStatus::timeout;
    auto model = std::vector< bool >( static_cast< std::size_t >( cnf.num_vars ) + 1, false );
    auto in = std::istringstream{ output };
    auto line = std::string{};
    auto answered = false;
    while ( std::getline( in, line ) )
    {
        if ( line.rfind( "s ", 0 ) == 0 )
        {
            answered = true;
            if ( line.find( "UNSATISFIABLE" ) != std::string::npos )
                outcome.status = SolveStatus::unsat;
            else if ( line.find( "SATISFIABLE" ) != std::string::npos )
                outcome.status = SolveStatus::sat;
        }
        else if ( line.rfind( "v ", 0 ) == 0 )
        {
            auto tokens = std::istringstream{ line.substr( 2 ) };
            long long lit = 0;
            while ( tokens >> lit )
            {
                auto v = static_cast< std::size_t >( std::llabs( lit ) );
                if ( lit != 0 && v < model.size() )
                    model[ v ] = lit > 0;
            }
        }
    }
    if ( answered && outcome.status == SolveStatus::sat )
    {
        if ( satisfies( full, model ) )
            outcome.model = std::move( model );
        else
            outcome.status = SolveStatus::timeout;
    }
    outcome.elapsed = std::chrono::duration< double >( Clock::now() - start ).count();
    return outcome;
}

} // namespace hwv
