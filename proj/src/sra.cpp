#include "hwv/sra.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace hwv
{

namespace
{

constexpr auto saturated = std::numeric_limits< std::uint64_t >::max();

std::uint64_t add( std::uint64_t a, std::uint64_t b ) { return a > saturated - b ? saturated : a + b; }

std::uint64_t mul( std::uint64_t a, std::uint64_t b )
{
    if ( a == 0 || b == 0 )
        return 0;
    return a > saturated / b ? saturated : a * b;
}

} // namespace

CorScore cor( const FlatModel& model, std::string_view reg, const SraWeights& weights, bool multiplicity )
{
    const auto cone = fanout_cone( model, reg );
    const auto* r = model.find_register( reg );
    const auto& nodes = model.nodes();

    auto own = std::set< std::size_t >{};
    for ( auto bit : r->bits )
        own.insert( model.driver( bit ) );

    auto in_layer = std::vector< char >( nodes.size(), 0 );
    for ( auto i : cone.first_layer )
        in_layer[ i ] = 1;

    // paths[n]: paths from net n to a sink; visits[n]: layer nodes on them.
    auto paths = std::vector< std::uint64_t >( model.net_count(), 0 );
    auto visits = std::vector< std::uint64_t >( model.net_count(), 0 );
    auto terminal_dffs = std::set< std::size_t >{};
    auto count_net = [&]( NetId net ) {
        auto p = std::uint64_t{ model.is_output( net ) ? 1u : 0u };
        auto v = std::uint64_t{ 0 };
        for ( auto consumer : model.fanout( net ) )
        {
            const auto& node = nodes[ consumer ];
            if ( node.is_dff() )
            {
                if ( own.count( consumer ) == 0 )
                {
                    p = add( p, 1 );
                    v = add( v, 1 );
                    terminal_dffs.insert( consumer );
                }
                continue;
            }
            if ( !in_layer[ consumer ] )
                continue;
            p = add( p, paths[ node.output ] );
            v = add( v, add( paths[ node.output ], visits[ node.output ] ) );
        }
        paths[ net ] = p;
        visits[ net ] = v;
    };
    for ( auto it = cone.first_layer.rbegin(); it != cone.first_layer.rend(); ++it )
        count_net( nodes[ *it ].output );

    auto score = CorScore{};
    score.reg = std::string{ reg };
    auto layer_visits = std::uint64_t{ 0 };
    for ( auto bit : r->bits )
    {
        count_net( bit );
        score.paths = add( score.paths, paths[ bit ] );
        layer_visits = add( layer_visits, visits[ bit ] );
    }

    // First-layer nodes on no path only feed the register's own DFFs (hold
    // and bus write logic); they are not part of its cone of relevance.
    auto beyond = std::uint64_t{ 0 };
    auto layer = std::uint64_t{ 0 };
    for ( auto e : cone.elements )
    {
        if ( in_layer[ e ] )
            layer += paths[ nodes[ e ].output ] != 0 ? 1 : 0;
        else if ( multiplicity && terminal_dffs.count( e ) != 0 )
            continue;
        else
            ++beyond;
    }
    score.elements = multiplicity ? add( layer_visits, beyond ) : layer + beyond;
    score.score = add( mul( weights.path, score.paths ), mul( weights.element, score.elements ) );
    return score;
}

std::vector< CorScore > do_sra( const FlatModel& model, const RegisterMap& mapped, const SraWeights& weights, bool multiplicity )
{
    auto ranked = std::vector< CorScore >{};
    for ( const auto& entry : mapped.entries )
    {
        const auto* reg = model.find_register( entry.reg );
        if ( reg == nullptr || !reg->software_visible )
            continue;
        if ( std::any_of( ranked.begin(), ranked.end(), [&]( const auto& s ) { return s.reg == entry.reg; } ) )
            continue;
        ranked.push_back( cor( model, entry.reg, weights, multiplicity ) );
    }
    std::sort( ranked.begin(), ranked.end(), []( const auto& a, const auto& b ) {
        if ( a.score != b.score )
            return a.score > b.score;
        return a.reg < b.reg;
    } );
    return ranked;
}

std::vector< std::string > combine_regs( const std::vector< CorScore >& ranked, std::size_t n )
{
    if ( n < 1 || n > ranked.size() )
        throw Error( ErrorCode::exhausted_registers, "iteration " + std::to_string( n ) + " exceeds the " +
                                                         std::to_string( ranked.size() ) + " ranked registers" );
    auto out = std::vector< std::string >{};
    for ( std::size_t i = 0; i < n; ++i )
        out.push_back( ranked[ i ].reg );
    return out;
}

} // namespace hwv
