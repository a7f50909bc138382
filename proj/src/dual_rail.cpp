#include "hwv/bmc.hpp"

#include <unordered_map>

namespace hwv
{

namespace
{

struct Rail
{
    NetId v;
    NetId k;
};

// Emits binary gates, folding the shared constant nets on the fly.
class RailBuilder
{
public:
    explicit RailBuilder( FlatModel::Parts& parts ) : parts_( parts )
    {
        zero_ = make_const( false );
        one_ = make_const( true );
    }

    NetId zero() const { return zero_; }
    NetId one() const { return one_; }

    NetId fresh( std::string name = {} )
    {
        parts_.net_names.push_back( std::move( name ) );
        return parts_.net_count++;
    }

    NetId not_( NetId a )
    {
        if ( a == zero_ )
            return one_;
        if ( a == one_ )
            return zero_;
        return emit( NodeKind::not_gate, { a } );
    }

    NetId and_( NetId a, NetId b )
    {
        if ( a == zero_ || b == zero_ )
            return zero_;
        if ( a == one_ )
            return b;
        if ( b == one_ || a == b )
            return a;
        return emit( NodeKind::and_gate, { a, b } );
    }

    NetId or_( NetId a, NetId b )
    {
        if ( a == one_ || b == one_ )
            return one_;
        if ( a == zero_ )
            return b;
        if ( b == zero_ || a == b )
            return a;
        return emit( NodeKind::or_gate, { a, b } );
    }

    NetId xor_( NetId a, NetId b )
    {
        if ( a == zero_ )
            return b;
        if ( b == zero_ )
            return a;
        if ( a == one_ )
            return not_( b );
        if ( b == one_ )
            return not_( a );
        if ( a == b )
            return zero_;
        return emit( NodeKind::xor_gate, { a, b } );
    }

    NetId mux( NetId s, NetId a, NetId b )
    {
        if ( s == zero_ || a == b )
            return a;
        if ( s == one_ )
            return b;
        return emit( NodeKind::mux, { s, a, b } );
    }

    Rail dual_not( Rail a ) { return { not_( a.v ), a.k }; }

    Rail dual_and( Rail a, Rail b )
    {
        auto k = or_( and_( a.k, b.k ), or_( and_( a.k, not_( a.v ) ), and_( b.k, not_( b.v ) ) ) );
        return { and_( a.v, b.v ), k };
    }

    Rail dual_or( Rail a, Rail b )
    {
        auto k = or_( and_( a.k, b.k ), or_( and_( a.k, a.v ), and_( b.k, b.v ) ) );
        return { or_( a.v, b.v ), k };
    }

    Rail dual_xor( Rail a, Rail b ) { return { xor_( a.v, b.v ), and_( a.k, b.k ) }; }

    Rail dual_mux( Rail s, Rail a, Rail b )
    {
        auto agree = and_( and_( a.k, b.k ), not_( xor_( a.v, b.v ) ) );
        return { mux( s.v, a.v, b.v ), mux( s.k, agree, mux( s.v, a.k, b.k ) ) };
    }

    Rail constant( Tri t )
    {
        if ( t == Tri::x )
            return { zero_, zero_ };
        return { t == Tri::one ? one_ : zero_, one_ };
    }

private:
    NetId make_const( bool bit )
    {
        auto net = fresh( bit ? "$one" : "$zero" );
        parts_.nodes.push_back( Node{ NodeKind::constant, net, {}, tri_of( bit ), no_net, no_net, Tri::x, no_origin } );
        return net;
    }

    NetId emit( NodeKind kind, std::vector< NetId > inputs )
    {
        auto out = fresh();
        parts_.nodes.push_back( Node{ kind, out, std::move( inputs ), Tri::x, no_net, no_net, Tri::x, no_origin } );
        return out;
    }

    FlatModel::Parts& parts_;
    NetId zero_ = no_net;
    NetId one_ = no_net;
};

} // namespace

DualRailModel xprop_encode( const FlatModel& model )
{
    auto parts = FlatModel::Parts{};
    parts.name = model.name() + "$dual";
    auto b = RailBuilder{ parts };
    const auto n = model.net_count();
    auto rail = std::vector< Rail >( n, b.constant( Tri::x ) );

    for ( const auto& port : model.inputs() )
    {
        auto bits = std::vector< NetId >{};
        for ( auto bit : port.bits )
        {
            rail[ bit ] = { b.fresh( model.net_name( bit ) ), b.one() };
            bits.push_back( rail[ bit ].v );
        }
        parts.inputs.push_back( { port.name, bits } );
    }
    for ( auto i : model.dff_nodes() )
    {
        auto q = model.nodes()[ i ].output;
        rail[ q ] = { b.fresh( model.net_name( q ) ), b.fresh( model.net_name( q ) + "$k" ) };
    }
    for ( auto i : model.comb_order() )
    {
        const auto& node = model.nodes()[ i ];
        auto in = [&]( std::size_t k ) { return rail[ node.inputs[ k ] ]; };
        switch ( node.kind )
        {
        case NodeKind::and_gate: rail[ node.output ] = b.dual_and( in( 0 ), in( 1 ) ); break;
        case NodeKind::or_gate: rail[ node.output ] = b.dual_or( in( 0 ), in( 1 ) ); break;
        case NodeKind::xor_gate: rail[ node.output ] = b.dual_xor( in( 0 ), in( 1 ) ); break;
        case NodeKind::not_gate: rail[ node.output ] = b.dual_not( in( 0 ) ); break;
        case NodeKind::mux: rail[ node.output ] = b.dual_mux( in( 0 ), in( 1 ), in( 2 ) ); break;
        case NodeKind::constant: rail[ node.output ] = b.constant( node.value ); break;
        case NodeKind::dff: break;
        }
    }

    // Next-state logic with enable and reset folded into multiplexers.
    auto next = std::vector< std::pair< std::size_t, Rail > >{};
    for ( auto i : model.dff_nodes() )
    {
        const auto& node = model.nodes()[ i ];
        auto q = rail[ node.output ];
        auto loaded = rail[ node.inputs[ 0 ] ];
        if ( node.enable != no_net )
            loaded = b.dual_mux( rail[ node.enable ], q, loaded );
        if ( node.reset != no_net )
            loaded = b.dual_mux( rail[ node.reset ], loaded, b.constant( node.reset_value ) );
        next.emplace_back( i, loaded );
    }
    for ( const auto& [i, d] : next )
    {
        const auto& node = model.nodes()[ i ];
        auto q = rail[ node.output ];
        parts.nodes.push_back(
            Node{ NodeKind::dff, q.v, { d.v }, tri_of( node.value == Tri::one ), no_net, no_net, Tri::x, node.origin } );
        parts.nodes.push_back(
            Node{ NodeKind::dff, q.k, { d.k }, tri_of( is_known( node.value ) ), no_net, no_net, Tri::x, node.origin } );
    }

    for ( const auto& r : model.registers() )
    {
        auto reg = FlatRegister{};
        reg.name = r.name;
        reg.instance = r.instance;
        for ( auto bit : r.bits )
            reg.bits.push_back( rail[ bit ].v );
        parts.registers.push_back( std::move( reg ) );
    }

    auto result = DualRailModel{};
    result.value.resize( n );
    result.known.resize( n );
    for ( NetId net = 0; net < n; ++net )
    {
        result.value[ net ] = rail[ net ].v;
        result.known[ net ] = rail[ net ].k;
    }
    result.model = FlatModel{ std::move( parts ) };
    return result;
}

} // namespace hwv
