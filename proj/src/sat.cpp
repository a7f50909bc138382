#include "hwv/sat.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hwv
{

std::string_view solve_status_name( SolveStatus s ) noexcept
{
    switch ( s )
    {
    case SolveStatus::sat: return "SAT";
    case SolveStatus::unsat: return "UNSAT";
    case SolveStatus::timeout: return "TIMEOUT";
    }
    return "?";
}

bool satisfies( const Cnf& cnf, const std::vector< bool >& model )
{
    for ( const auto& clause : cnf.clauses )
    {
        auto sat = std::any_of( clause.begin(), clause.end(), [&]( int l ) {
            auto v = static_cast< std::size_t >( std::abs( l ) );
            return v < model.size() && model[ v ] == ( l > 0 );
        } );
        if ( !sat )
            return false;
    }
    return true;
}

namespace
{

using Lit = std::uint32_t;
using CRef = std::uint32_t;

constexpr CRef no_reason = 0xffffffffu;
constexpr Lit no_lit = 0xffffffffu;

constexpr std::uint8_t l_true = 0;
constexpr std::uint8_t l_false = 1;
constexpr std::uint8_t l_undef = 2;

constexpr Lit make_lit( int var, bool negative ) { return static_cast< Lit >( var ) * 2 + ( negative ? 1 : 0 ); }
constexpr int var_of( Lit l ) { return static_cast< int >( l >> 1 ); }
constexpr bool sign_of( Lit l ) { return ( l & 1u ) != 0; }

struct Watcher
{
    CRef cref;
    Lit blocker;
};

// Clause layout in the arena: size, flags, activity bits, lbd, literals.
constexpr std::uint32_t header = 4;
constexpr std::uint32_t flag_learnt = 1;
constexpr std::uint32_t flag_deleted = 2;

double luby( double y, int x )
{
    auto size = 1;
    auto seq = 0;
    while ( size < x + 1 )
    {
        ++seq;
        size = 2 * size + 1;
    }
    while ( size - 1 != x )
    {
        size = ( size - 1 ) >> 1;
        --seq;
        x = x % size;
    }
    return std::pow( y, seq );
}

} // namespace

struct Solver::Impl
{
    explicit Impl( std::uint64_t seed ) : rng( seed ) {}

    // --- clause arena -----------------------------------------------------
    std::vector< std::uint32_t > arena;
    std::vector< CRef > clauses;
    std::vector< CRef > learnts;
    std::size_t wasted = 0;

    std::uint32_t size( CRef c ) const { return arena[ c ]; }
    Lit* lits( CRef c ) { return reinterpret_cast< Lit* >( &arena[ c + header ] ); }
    bool learnt( CRef c ) const { return ( arena[ c + 1 ] & flag_learnt ) != 0; }
    float activity_of( CRef c ) const { return std::bit_cast< float >( arena[ c + 2 ] ); }
    void set_activity( CRef c, float a ) { arena[ c + 2 ] = std::bit_cast< std::uint32_t >( a ); }

    CRef alloc( const std::vector< Lit >& ls, bool is_learnt, std::uint32_t lbd )
    {
        auto c = static_cast< CRef >( arena.size() );
        arena.push_back( static_cast< std::uint32_t >( ls.size() ) );
        arena.push_back( is_learnt ? flag_learnt : 0 );
        arena.push_back( std::bit_cast< std::uint32_t >( 0.0f ) );
        arena.push_back( lbd );
        arena.insert( arena.end(), ls.begin(), ls.end() );
        return c;
    }

    void attach( CRef c )
    {
        auto* l = lits( c );
        watches[ l[ 0 ] ].push_back( { c, l[ 1 ] } );
        watches[ l[ 1 ] ].push_back( { c, l[ 0 ] } );
    }

    // --- assignment -------------------------------------------------------
    std::vector< std::uint8_t > assigns;
    std::vector< int > level;
    std::vector< CRef > reason;
    std::vector< char > polarity;
    std::vector< char > seen;
    std::vector< std::vector< Watcher > > watches;
    std::vector< Lit > trail;
    std::vector< std::size_t > trail_lim;
    std::size_t qhead = 0;
    bool ok = true;
    std::vector< bool > model_values;

    std::uint8_t value( Lit l ) const
    {
        auto a = assigns[ var_of( l ) ];
        return a == l_undef ? l_undef : static_cast< std::uint8_t >( a ^ ( l & 1u ) );
    }

    int decision_level() const { return static_cast< int >( trail_lim.size() ); }

    void enqueue( Lit l, CRef from )
    {
        auto v = var_of( l );
        assigns[ v ] = sign_of( l ) ? l_false : l_true;
        level[ v ] = decision_level();
        reason[ v ] = from;
        trail.push_back( l );
    }

    // --- VSIDS ------------------------------------------------------------
    std::vector< double > activity;
    double var_inc = 1.0;
    double clause_inc = 1.0;
    std::vector< int > heap;
    std::vector< int > heap_index;

    bool heap_less( int a, int b ) const
    {
        if ( activity[ a ] != activity[ b ] )
            return activity[ a ] > activity[ b ];
        return a < b;
    }

    void heap_up( std::size_t i )
    {
        auto v = heap[ i ];
        while ( i > 0 )
        {
            auto parent = ( i - 1 ) / 2;
            if ( !heap_less( v, heap[ parent ] ) )
                break;
            heap[ i ] = heap[ parent ];
            heap_index[ heap[ i ] ] = static_cast< int >( i );
            i = parent;
        }
        heap[ i ] = v;
        heap_index[ v ] = static_cast< int >( i );
    }

    void heap_down( std::size_t i )
    {
        auto v = heap[ i ];
        for ( ;; )
        {
            auto child = 2 * i + 1;
            if ( child >= heap.size() )
                break;
            if ( child + 1 < heap.size() && heap_less( heap[ child + 1 ], heap[ child ] ) )
                ++child;
            if ( !heap_less( heap[ child ], v ) )
                break;
            heap[ i ] = heap[ child ];
            heap_index[ heap[ i ] ] = static_cast< int >( i );
            i = child;
        }
        heap[ i ] = v;
        heap_index[ v ] = static_cast< int >( i );
    }

    void heap_insert( int v )
    {
        if ( heap_index[ v ] >= 0 )
            return;
        heap.push_back( v );
        heap_up( heap.size() - 1 );
    }

    int heap_pop()
    {
        auto top = heap.front();
        heap_index[ top ] = -1;
        auto last = heap.back();
        heap.pop_back();
        if ( !heap.empty() )
        {
            heap[ 0 ] = last;
            heap_index[ last ] = 0;
            heap_down( 0 );
        }
        return top;
    }

    void bump_var( int v )
    {
        activity[ v ] += var_inc;
        if ( activity[ v ] > 1e100 )
        {
            for ( auto& a : activity )
                a *= 1e-100;
            var_inc *= 1e-100;
        }
        if ( heap_index[ v ] >= 0 )
            heap_up( static_cast< std::size_t >( heap_index[ v ] ) );
    }

    void bump_clause( CRef c )
    {
        auto a = activity_of( c ) + static_cast< float >( clause_inc );
        set_activity( c, a );
        if ( a > 1e20f )
        {
            for ( auto l : learnts )
                set_activity( l, activity_of( l ) * 1e-20f );
            clause_inc *= 1e-20;
        }
    }

    // --- search state -----------------------------------------------------
    std::mt19937_64 rng;
    std::uint64_t conflicts = 0;
    std::uint64_t decisions = 0;
    double max_learnts = 0;
    std::vector< Lit > assumptions;

    int new_var()
    {
        auto v = static_cast< int >( assigns.size() );
        assigns.push_back( l_undef );
        level.push_back( 0 );
        reason.push_back( no_reason );
        polarity.push_back( 1 );
        seen.push_back( 0 );
        activity.push_back( 0.0 );
        heap_index.push_back( -1 );
        watches.emplace_back();
        watches.emplace_back();
        heap_insert( v );
        return v;
    }

    bool add_clause( std::span< const int > input )
    {
        if ( !ok )
            return false;
        auto ls = std::vector< Lit >{};
        ls.reserve( input.size() );
        for ( auto d : input )
        {
            if ( d == 0 )
                throw std::invalid_argument( "literal 0 in clause" );
            auto v = std::abs( d ) - 1;
            while ( v >= static_cast< int >( assigns.size() ) )
                new_var();
            ls.push_back( make_lit( v, d < 0 ) );
        }
        std::sort( ls.begin(), ls.end() );
        auto out = std::size_t{ 0 };
        auto prev = no_lit;
        for ( auto l : ls )
        {
            if ( value( l ) == l_true || ( prev != no_lit && l == ( prev ^ 1u ) ) )
                return true;
            if ( value( l ) == l_false || l == prev )
                continue;
            ls[ out++ ] = prev = l;
        }
        ls.resize( out );
        if ( ls.empty() )
            return ok = false;
        if ( ls.size() == 1 )
        {
            enqueue( ls[ 0 ], no_reason );
            if ( propagate() != no_reason )
                ok = false;
            return ok;
        }
        auto c = alloc( ls, false, 0 );
        clauses.push_back( c );
        attach( c );
        return true;
    }

    CRef propagate()
    {
        auto conflict = no_reason;
        while ( qhead < trail.size() )
        {
            auto p = trail[ qhead++ ];
            auto false_lit = p ^ 1u;
            auto& ws = watches[ false_lit ];
            auto i = std::size_t{ 0 };
            auto j = std::size_t{ 0 };
            auto n = ws.size();
            while ( i < n )
            {
                auto w = ws[ i++ ];
                if ( value( w.blocker ) == l_true )
                {
                    ws[ j++ ] = w;
                    continue;
                }
                auto c = w.cref;
                auto* l = lits( c );
                if ( l[ 0 ] == false_lit )
                    std::swap( l[ 0 ], l[ 1 ] );
                auto first = l[ 0 ];
                auto nw = Watcher{ c, first };
                if ( first != w.blocker && value( first ) == l_true )
                {
                    ws[ j++ ] = nw;
                    continue;
                }
                auto sz = size( c );
                auto found = false;
                for ( std::uint32_t k = 2; k < sz; ++k )
                {
                    if ( value( l[ k ] ) != l_false )
                    {
                        l[ 1 ] = l[ k ];
                        l[ k ] = false_lit;
                        watches[ l[ 1 ] ].push_back( nw );
                        found = true;
                        break;
                    }
                }
                if ( found )
                    continue;
                ws[ j++ ] = nw;
                if ( value( first ) == l_false )
                {
                    conflict = c;
                    qhead = trail.size();
                    while ( i < n )
                        ws[ j++ ] = ws[ i++ ];
                }
                else
                {
                    enqueue( first, c );
                }
            }
            ws.resize( j );
            if ( conflict != no_reason )
                break;
        }
        return conflict;
    }

    void cancel_until( int lvl )
    {
        if ( decision_level() <= lvl )
            return;
        for ( auto c = trail.size(); c-- > trail_lim[ lvl ]; )
        {
            auto v = var_of( trail[ c ] );
            assigns[ v ] = l_undef;
            reason[ v ] = no_reason;
            polarity[ v ] = sign_of( trail[ c ] ) ? 1 : 0;
            heap_insert( v );
        }
        qhead = trail_lim[ lvl ];
        trail.resize( trail_lim[ lvl ] );
        trail_lim.resize( lvl );
    }

    // First-UIP conflict analysis with basic clause minimization.
    void analyze( CRef confl, std::vector< Lit >& out, int& bt_level, std::uint32_t& lbd )
    {
        out.clear();
        out.push_back( no_lit );
        auto path = 0;
        auto p = no_lit;
        auto index = trail.size();
        do
        {
            if ( learnt( confl ) )
                bump_clause( confl );
            auto* l = lits( confl );
            auto sz = size( confl );
            for ( std::uint32_t k = ( p == no_lit ? 0 : 1 ); k < sz; ++k )
            {
                auto q = l[ k ];
                auto v = var_of( q );
                if ( seen[ v ] || level[ v ] == 0 )
                    continue;
                bump_var( v );
                seen[ v ] = 1;
                if ( level[ v ] >= decision_level() )
                    ++path;
                else
                    out.push_back( q );
            }
            while ( !seen[ var_of( trail[ --index ] ) ] )
                ;
            p = trail[ index ];
            confl = reason[ var_of( p ) ];
            seen[ var_of( p ) ] = 0;
            --path;
        } while ( path > 0 );
        out[ 0 ] = p ^ 1u;

        // Drop literals implied by other literals of the clause.
        auto kept = std::size_t{ 1 };
        auto to_clear = out;
        for ( std::size_t k = 1; k < out.size(); ++k )
        {
            auto v = var_of( out[ k ] );
            auto r = reason[ v ];
            auto redundant = r != no_reason;
            if ( redundant )
            {
                auto* l = lits( r );
                for ( std::uint32_t m = 1; m < size( r ); ++m )
                {
                    auto u = var_of( l[ m ] );
                    if ( !seen[ u ] && level[ u ] > 0 )
                    {
                        redundant = false;
                        break;
                    }
                }
            }
            if ( !redundant )
                out[ kept++ ] = out[ k ];
        }
        out.resize( kept );
        for ( auto l : to_clear )
        {
            if ( l != no_lit )
                seen[ var_of( l ) ] = 0;
        }

        bt_level = 0;
        if ( out.size() > 1 )
        {
            auto max_i = std::size_t{ 1 };
            for ( std::size_t k = 2; k < out.size(); ++k )
            {
                if ( level[ var_of( out[ k ] ) ] > level[ var_of( out[ max_i ] ) ] )
                    max_i = k;
            }
            std::swap( out[ 1 ], out[ max_i ] );
            bt_level = level[ var_of( out[ 1 ] ) ];
        }

        auto levels = std::vector< int >{};
        for ( auto l : out )
            levels.push_back( level[ var_of( l ) ] );
        std::sort( levels.begin(), levels.end() );
        lbd = static_cast< std::uint32_t >( std::unique( levels.begin(), levels.end() ) - levels.begin() );
    }

    bool locked( CRef c )
    {
        auto l0 = lits( c )[ 0 ];
        return value( l0 ) == l_true && reason[ var_of( l0 ) ] == c;
    }

    void reduce_db()
    {
        std::sort( learnts.begin(), learnts.end(), [&]( CRef a, CRef b ) {
            auto ga = arena[ a + 3 ] <= 2;
            auto gb = arena[ b + 3 ] <= 2;
            if ( ga != gb )
                return !ga;
            if ( activity_of( a ) != activity_of( b ) )
                return activity_of( a ) < activity_of( b );
            return a < b;
        } );
        auto half = learnts.size() / 2;
        auto kept = std::vector< CRef >{};
        for ( std::size_t i = 0; i < learnts.size(); ++i )
        {
            auto c = learnts[ i ];
            if ( i < half && arena[ c + 3 ] > 2 && size( c ) > 2 && !locked( c ) )
            {
                arena[ c + 1 ] |= flag_deleted;
                wasted += header + size( c );
            }
            else
            {
                kept.push_back( c );
            }
        }
        learnts = std::move( kept );
        compact();
    }

    // Rebuilds the arena without deleted clauses and fixes every reference.
    void compact()
    {
        auto fresh = std::vector< std::uint32_t >{};
        fresh.reserve( arena.size() - wasted );
        auto relocate = [&]( CRef c ) {
            auto n = static_cast< CRef >( fresh.size() );
            fresh.insert( fresh.end(), arena.begin() + c, arena.begin() + c + header + size( c ) );
            arena[ c + 1 ] |= 4u; // moved marker
            arena[ c + 2 ] = n;   // forwarding address
            return n;
        };
        auto forward = [&]( CRef c ) { return static_cast< CRef >( arena[ c + 2 ] ); };
        // Activity is overwritten by the forwarding address, restore it after.
        auto saved = std::vector< std::uint32_t >{};
        for ( auto& c : clauses )
        {
            saved.push_back( arena[ c + 2 ] );
            c = relocate( c );
            fresh[ c + 2 ] = saved.back();
        }
        for ( auto& c : learnts )
        {
            saved.push_back( arena[ c + 2 ] );
            c = relocate( c );
            fresh[ c + 2 ] = saved.back();
        }
        for ( auto& r : reason )
        {
            if ( r == no_reason )
                continue;
            r = ( arena[ r + 1 ] & 4u ) != 0 ? forward( r ) : no_reason;
        }
        for ( auto& ws : watches )
        {
            auto j = std::size_t{ 0 };
            for ( auto w : ws )
            {
                if ( ( arena[ w.cref + 1 ] & 4u ) == 0 )
                    continue;
                ws[ j++ ] = { forward( w.cref ), w.blocker };
            }
            ws.resize( j );
        }
        arena = std::move( fresh );
        for ( auto c : clauses )
            arena[ c + 1 ] &= ~4u;
        for ( auto c : learnts )
            arena[ c + 1 ] &= ~4u;
        wasted = 0;
    }

    Lit pick_branch()
    {
        if ( !heap.empty() && std::uniform_real_distribution< double >{ 0.0, 1.0 }( rng ) < 0.01 )
        {
            auto v = heap[ rng() % heap.size() ];
            if ( assigns[ v ] == l_undef )
                return make_lit( v, polarity[ v ] != 0 );
        }
        while ( !heap.empty() )
        {
            auto v = heap_pop();
            if ( assigns[ v ] == l_undef )
                return make_lit( v, polarity[ v ] != 0 );
        }
        return no_lit;
    }

    enum class Result
    {
        sat,
        unsat,
        restart,
        timeout
    };

    static bool expired( const std::optional< Clock::time_point >& deadline )
    {
        return deadline && Clock::now() >= *deadline;
    }

    Result search( std::uint64_t budget, const std::optional< Clock::time_point >& deadline )
    {
        auto local = std::uint64_t{ 0 };
        auto learnt_clause = std::vector< Lit >{};
        for ( ;; )
        {
            auto confl = propagate();
            if ( confl != no_reason )
            {
                ++conflicts;
                ++local;
                if ( decision_level() == 0 )
                {
                    ok = false;
                    return Result::unsat;
                }
                auto bt = 0;
                auto lbd = std::uint32_t{ 0 };
                analyze( confl, learnt_clause, bt, lbd );
                cancel_until( bt );
                if ( learnt_clause.size() == 1 )
                {
                    enqueue( learnt_clause[ 0 ], no_reason );
                }
                else
                {
                    auto c = alloc( learnt_clause, true, lbd );
                    learnts.push_back( c );
                    attach( c );
                    bump_clause( c );
                    enqueue( learnt_clause[ 0 ], c );
                }
                var_inc /= 0.95;
                clause_inc /= 0.999;
                if ( ( conflicts & 31u ) == 0 && expired( deadline ) )
                    return Result::timeout;
                continue;
            }

            if ( local >= budget )
            {
                cancel_until( 0 );
                return Result::restart;
            }
            if ( static_cast< double >( learnts.size() ) - static_cast< double >( trail.size() ) >= max_learnts )
            {
                reduce_db();
                max_learnts *= 1.05;
            }

            auto next = no_lit;
            while ( decision_level() < static_cast< int >( assumptions.size() ) )
            {
                auto p = assumptions[ decision_level() ];
                if ( value( p ) == l_true )
                {
                    trail_lim.push_back( trail.size() );
                }
                else if ( value( p ) == l_false )
                {
                    return Result::unsat;
                }
                else
                {
                    next = p;
                    break;
                }
            }
            if ( next == no_lit )
            {
                ++decisions;
                if ( ( decisions & 1023u ) == 0 && expired( deadline ) )
                    return Result::timeout;
                next = pick_branch();
                if ( next == no_lit )
                    return Result::sat;
            }
            trail_lim.push_back( trail.size() );
            enqueue( next, no_reason );
        }
    }

    SolveStatus solve( std::span< const int > assume, const std::optional< Clock::time_point >& deadline )
    {
        model_values.clear();
        if ( !ok )
            return SolveStatus::unsat;
        assumptions.clear();
        for ( auto d : assume )
        {
            auto v = std::abs( d ) - 1;
            while ( v >= static_cast< int >( assigns.size() ) )
                new_var();
            assumptions.push_back( make_lit( v, d < 0 ) );
        }
        max_learnts = std::max( 2000.0, static_cast< double >( clauses.size() ) / 3.0 );
        auto status = SolveStatus::timeout;
        for ( int restart = 0;; ++restart )
        {
            if ( expired( deadline ) )
                break;
            auto r = search( static_cast< std::uint64_t >( luby( 2.0, restart ) * 100 ), deadline );
            if ( r == Result::sat )
            {
                model_values.assign( assigns.size() + 1, false );
                for ( std::size_t v = 0; v < assigns.size(); ++v )
                    model_values[ v + 1 ] = assigns[ v ] == l_true;
                status = SolveStatus::sat;
                break;
            }
            if ( r == Result::unsat )
            {
                status = SolveStatus::unsat;
                break;
            }
            if ( r == Result::timeout )
                break;
        }
        cancel_until( 0 );
        return status;
    }
};

Solver::Solver( std::uint64_t seed ) : impl_( std::make_unique< Impl >( seed ) ) {}
Solver::~Solver() = default;

int Solver::new_var() { return impl_->new_var() + 1; }
int Solver::num_vars() const noexcept { return static_cast< int >( impl_->assigns.size() ); }
bool Solver::add_clause( std::span< const int > lits ) { return impl_->add_clause( lits ); }

SolveStatus Solver::solve( std::span< const int > assumptions, std::optional< Clock::time_point > deadline )
{
    return impl_->solve( assumptions, deadline );
}

bool Solver::value( int var ) const { return impl_->model_values.at( static_cast< std::size_t >( var ) ); }
std::vector< bool > Solver::model() const { return impl_->model_values; }
std::uint64_t Solver::conflicts() const noexcept { return impl_->conflicts; }
std::uint64_t Solver::decisions() const noexcept { return impl_->decisions; }

SolveOutcome solve( const Cnf& cnf, std::span< const int > assumptions, double budget, std::uint64_t seed )
{
    auto start = Clock::now();
    auto solver = Solver{ seed };
    for ( int v = 0; v < cnf.num_vars; ++v )
        solver.new_var();
    for ( const auto& c : cnf.clauses )
        solver.add_clause( c );
    auto deadline = start + std::chrono::duration_cast< Clock::duration >( std::chrono::duration< double >( budget ) );
    auto outcome = SolveOutcome{};
    outcome.status = solver.solve( assumptions, deadline );
    if ( outcome.status == SolveStatus::sat )
    {
        outcome.model = solver.model();
        outcome.model.resize( static_cast< std::size_t >( std::max( cnf.num_vars, solver.num_vars() ) ) + 1, false );
    }
    outcome.elapsed = std::chrono::duration< double >( Clock::now() - start ).count();
    return outcome;
}

} // namespace hwv
