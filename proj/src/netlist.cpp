#include "hwv/netlist.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>

namespace hwv
{

std::string_view node_kind_name( NodeKind kind ) noexcept
{
    switch ( kind )
    {
    case NodeKind::and_gate: return "AND";
    case NodeKind::or_gate: return "OR";
    case NodeKind::xor_gate: return "XOR";
    case NodeKind::not_gate: return "NOT";
    case NodeKind::mux: return "MUX";
    case NodeKind::constant: return "CONST";
    case NodeKind::dff: return "DFF";
    }
    return "?";
}

std::optional< NodeKind > node_kind_from_name( std::string_view name ) noexcept
{
    for ( auto kind : { NodeKind::and_gate, NodeKind::or_gate, NodeKind::xor_gate, NodeKind::not_gate,
                        NodeKind::mux, NodeKind::constant, NodeKind::dff } )
    {
        if ( node_kind_name( kind ) == name )
            return kind;
    }
    return std::nullopt;
}

std::size_t arity( NodeKind kind ) noexcept
{
    switch ( kind )
    {
    case NodeKind::not_gate:
    case NodeKind::dff: return 1;
    case NodeKind::mux: return 3;
    case NodeKind::constant: return 0;
    default: return 2;
    }
}

const SignalDecl* IpNetlist::find_signal( std::string_view signal ) const
{
    auto it = std::find_if( signals.begin(), signals.end(), [&]( const auto& s ) { return s.name == signal; } );
    return it == signals.end() ? nullptr : &*it;
}

const RegisterDecl* IpNetlist::find_register( std::string_view reg ) const
{
    auto it = std::find_if( registers.begin(), registers.end(), [&]( const auto& r ) { return r.name == reg; } );
    return it == registers.end() ? nullptr : &*it;
}

std::vector< const SignalDecl* > IpNetlist::ports() const
{
    auto result = std::vector< const SignalDecl* >{};
    for ( const auto& s : signals )
    {
        if ( s.is_port() )
            result.push_back( &s );
    }
    return result;
}

namespace
{

struct StructureIndex
{
    std::vector< std::size_t > driver;
    std::vector< std::size_t > comb_order;
    std::vector< std::vector< std::size_t > > fanout;
};

// Shared by IP validation and flat-model construction.
StructureIndex index_structure( NetId net_count, const std::vector< Node >& nodes, const std::vector< char >& is_input,
                                const std::function< std::string( NetId ) >& name_of )
{
    auto index = StructureIndex{};
    index.driver.assign( net_count, no_node );
    index.fanout.resize( net_count );

    for ( std::size_t i = 0; i < nodes.size(); ++i )
    {
        const auto& node = nodes[ i ];
        if ( node.inputs.size() != arity( node.kind ) )
            throw Error( ErrorCode::syntax_error, std::string{ node_kind_name( node.kind ) } + " with wrong arity" );
        if ( node.output >= net_count )
            throw Error( ErrorCode::unknown_signal, "node output out of range" );
        if ( index.driver[ node.output ] != no_node || is_input[ node.output ] )
            throw Error( ErrorCode::multiple_drivers, "net " + name_of( node.output ) + " has more than one driver" );
        if ( node.is_dff() && node.reset != no_net && !is_known( node.reset_value ) )
            throw Error( ErrorCode::syntax_error, "DFF " + name_of( node.output ) + " has a reset net but no reset value" );
        index.driver[ node.output ] = i;
    }

    auto use = [&]( std::size_t consumer, NetId net ) {
        if ( net >= net_count )
            throw Error( ErrorCode::unknown_signal, "net reference out of range" );
        auto& fo = index.fanout[ net ];
        if ( fo.empty() || fo.back() != consumer )
            fo.push_back( consumer );
    };
    for ( std::size_t i = 0; i < nodes.size(); ++i )
    {
        for ( auto in : nodes[ i ].inputs )
            use( i, in );
        if ( nodes[ i ].enable != no_net )
            use( i, nodes[ i ].enable );
        if ( nodes[ i ].reset != no_net )
            use( i, nodes[ i ].reset );
    }
    for ( NetId net = 0; net < net_count; ++net )
    {
        if ( !index.fanout[ net ].empty() && index.driver[ net ] == no_node && !is_input[ net ] )
            throw Error( ErrorCode::undriven_net, "net " + name_of( net ) + " is used but never driven" );
    }

    auto pending = std::vector< std::size_t >( nodes.size(), 0 );
    auto ready = std::queue< std::size_t >{};
    auto comb_count = std::size_t{ 0 };
    for ( std::size_t i = 0; i < nodes.size(); ++i )
    {
        if ( nodes[ i ].is_dff() )
            continue;
        ++comb_count;
        for ( auto in : nodes[ i ].inputs )
        {
            auto d = index.driver[ in ];
            if ( d != no_node && !nodes[ d ].is_dff() )
                ++pending[ i ];
        }
        if ( pending[ i ] == 0 )
            ready.push( i );
    }
    while ( !ready.empty() )
    {
        auto i = ready.front();
        ready.pop();
        index.comb_order.push_back( i );
        for ( auto consumer : index.fanout[ nodes[ i ].output ] )
        {
            if ( nodes[ consumer ].is_dff() )
                continue;
            // A consumer may read the same net on several pins.
            for ( auto in : nodes[ consumer ].inputs )
            {
                if ( in == nodes[ i ].output && --pending[ consumer ] == 0 )
                    ready.push( consumer );
            }
        }
    }
    if ( index.comb_order.size() != comb_count )
    {
        for ( std::size_t i = 0; i < nodes.size(); ++i )
        {
            if ( !nodes[ i ].is_dff() && pending[ i ] != 0 )
                throw Error( ErrorCode::combinational_loop, "combinational loop through " + name_of( nodes[ i ].output ) );
        }
    }
    return index;
}

} // namespace

void validate( const IpNetlist& ip )
{
    auto is_input = std::vector< char >( ip.net_count, 0 );
    auto names = std::vector< std::string >( ip.net_count );
    for ( const auto& s : ip.signals )
    {
        if ( s.first + s.width > ip.net_count )
            throw Error( ErrorCode::unknown_signal, "signal " + s.name + " exceeds the net space" );
        for ( unsigned i = 0; i < s.width; ++i )
        {
            names[ s.bit( i ) ] = s.name + "[" + std::to_string( i ) + "]";
            if ( s.kind == SignalKind::input )
                is_input[ s.bit( i ) ] = 1;
        }
    }
    auto index = index_structure( ip.net_count, ip.nodes, is_input, [&]( NetId n ) { return names[ n ]; } );
    for ( const auto& reg : ip.registers )
    {
        if ( reg.width == 0 || reg.bits.size() != reg.width || reg.init.size() != reg.width )
            throw Error( ErrorCode::width_mismatch, "register " + reg.name + " has inconsistent width" );
        for ( auto bit : reg.bits )
        {
            auto d = index.driver.at( bit );
            if ( d == no_node || !ip.nodes[ d ].is_dff() )
                throw Error( ErrorCode::undriven_net, "register bit " + names[ bit ] + " is not driven by a DFF" );
        }
    }
}

const Instance* Design::find_instance( std::string_view inst ) const
{
    auto it = std::find_if( instances.begin(), instances.end(), [&]( const auto& i ) { return i.name == inst; } );
    return it == instances.end() ? nullptr : &*it;
}

Design subdesign( const Design& design, std::span< const std::string > keep )
{
    auto kept = [&]( const std::string& inst ) { return std::find( keep.begin(), keep.end(), inst ) != keep.end(); };
    auto result = Design{};
    result.name = design.name;
    for ( const auto& inst : design.instances )
    {
        if ( kept( inst.name ) )
            result.instances.push_back( inst );
    }
    for ( const auto& c : design.connections )
    {
        if ( kept( c.a.instance ) && kept( c.b.instance ) )
            result.connections.push_back( c );
    }
    for ( const auto& t : design.top )
    {
        if ( kept( t.target.instance ) )
            result.top.push_back( t );
    }
    return result;
}

FlatModel::FlatModel( Parts parts ) : parts_( std::move( parts ) )
{
    auto n = parts_.net_count;
    parts_.net_names.resize( n );
    for ( NetId i = 0; i < n; ++i )
    {
        if ( parts_.net_names[ i ].empty() )
            parts_.net_names[ i ] = "$n" + std::to_string( i );
    }
    input_flag_.assign( n, 0 );
    output_flag_.assign( n, 0 );
    for ( const auto& port : parts_.inputs )
    {
        for ( auto bit : port.bits )
        {
            if ( input_flag_.at( bit ) )
                throw Error( ErrorCode::multiple_drivers, "net " + parts_.net_names[ bit ] + " bound to two inputs" );
            input_flag_[ bit ] = 1;
        }
    }
    for ( const auto& port : parts_.outputs )
    {
        for ( auto bit : port.bits )
            output_flag_.at( bit ) = 1;
    }

    auto index = index_structure( n, parts_.nodes, input_flag_, [&]( NetId net ) { return parts_.net_names[ net ]; } );
    driver_ = std::move( index.driver );
    comb_order_ = std::move( index.comb_order );
    fanout_ = std::move( index.fanout );

    for ( std::size_t i = 0; i < parts_.nodes.size(); ++i )
    {
        const auto& node = parts_.nodes[ i ];
        if ( !node.is_dff() )
            continue;
        dffs_.push_back( i );
        if ( node.reset != no_net && input_flag_[ node.reset ] )
            reset_inputs_.push_back( node.reset );
    }
    std::sort( reset_inputs_.begin(), reset_inputs_.end() );
    reset_inputs_.erase( std::unique( reset_inputs_.begin(), reset_inputs_.end() ), reset_inputs_.end() );
}

const FlatRegister* FlatModel::find_register( std::string_view reg ) const
{
    const auto& regs = parts_.registers;
    auto it = std::find_if( regs.begin(), regs.end(), [&]( const auto& r ) { return r.name == reg; } );
    return it == regs.end() ? nullptr : &*it;
}

const FlatPort* FlatModel::find_input( std::string_view port ) const
{
    const auto& ins = parts_.inputs;
    auto it = std::find_if( ins.begin(), ins.end(), [&]( const auto& p ) { return p.name == port; } );
    return it == ins.end() ? nullptr : &*it;
}

std::optional< std::uint32_t > FlatModel::find_instance( std::string_view inst ) const
{
    for ( std::uint32_t i = 0; i < parts_.instances.size(); ++i )
    {
        if ( parts_.instances[ i ].name == inst )
            return i;
    }
    return std::nullopt;
}

const std::vector< NetId >* FlatModel::find_signal( std::string_view signal ) const
{
    auto it = parts_.signals.find( signal );
    return it == parts_.signals.end() ? nullptr : &it->second;
}

std::vector< std::string > list_unique_ips( const Design& design )
{
    auto names = std::set< std::string >{};
    for ( const auto& inst : design.instances )
        names.insert( inst.module );
    return { names.begin(), names.end() };
}

std::vector< InstanceScore > rank_ips_by_connection( const Design& design, const Library& library )
{
    auto width_of = [&]( const PortRef& ref ) -> unsigned {
        const auto* inst = design.find_instance( ref.instance );
        if ( inst == nullptr )
            throw Error( ErrorCode::unknown_instance, "unknown instance " + ref.instance );
        auto it = library.find( inst->module );
        if ( it == library.end() )
            throw Error( ErrorCode::unknown_module, "unknown module " + inst->module );
        const auto* sig = it->second.find_signal( ref.port );
        if ( sig == nullptr || !sig->is_port() )
            throw Error( ErrorCode::unknown_signal, "unknown port " + ref.instance + "." + ref.port );
        return sig->width;
    };

    // A port bound to several inter-instance nets counts once.
    auto bound = std::set< std::pair< std::string, std::string > >{};
    for ( const auto& c : design.connections )
    {
        if ( c.a.instance == c.b.instance )
            continue;
        bound.emplace( c.a.instance, c.a.port );
        bound.emplace( c.b.instance, c.b.port );
    }

    auto scores = std::vector< InstanceScore >{};
    for ( const auto& inst : design.instances )
        scores.push_back( { inst.name, 0 } );
    for ( const auto& [inst, port] : bound )
    {
        auto it = std::find_if( scores.begin(), scores.end(), [&]( const auto& s ) { return s.instance == inst; } );
        it->connected_bits += width_of( { inst, port } );
    }
    std::sort( scores.begin(), scores.end(), []( const auto& a, const auto& b ) {
        if ( a.connected_bits != b.connected_bits )
            return a.connected_bits > b.connected_bits;
        return a.instance < b.instance;
    } );
    return scores;
}

FanoutCone fanout_cone( const FlatModel& model, std::string_view reg )
{
    const auto* r = model.find_register( reg );
    if ( r == nullptr )
        throw Error( ErrorCode::unknown_register, "unknown register " + std::string{ reg } );

    auto own = std::vector< char >( model.nodes().size(), 0 );
    for ( auto bit : r->bits )
        own[ model.driver( bit ) ] = 1;

    auto cone = FanoutCone{};
    cone.sources = r->bits;

    auto seen_node = std::vector< char >( model.nodes().size(), 0 );
    auto seen_net = std::vector< char >( model.net_count(), 0 );
    auto in_layer = std::vector< char >( model.nodes().size(), 0 );

    // First layer: combinational nodes reachable without entering a DFF.
    auto stack = std::vector< NetId >( r->bits.begin(), r->bits.end() );
    for ( auto bit : r->bits )
        seen_net[ bit ] = 1;
    while ( !stack.empty() )
    {
        auto net = stack.back();
        stack.pop_back();
        for ( auto consumer : model.fanout( net ) )
        {
            const auto& node = model.nodes()[ consumer ];
            if ( node.is_dff() || in_layer[ consumer ] )
                continue;
            in_layer[ consumer ] = 1;
            if ( !seen_net[ node.output ] )
            {
                seen_net[ node.output ] = 1;
                stack.push_back( node.output );
            }
        }
    }
    for ( auto i : model.comb_order() )
    {
        if ( in_layer[ i ] )
            cone.first_layer.push_back( i );
    }

    // Elements: everything reachable, crossing DFF boundaries.
    std::fill( seen_net.begin(), seen_net.end(), 0 );
    stack.assign( r->bits.begin(), r->bits.end() );
    for ( auto bit : r->bits )
        seen_net[ bit ] = 1;
    while ( !stack.empty() )
    {
        auto net = stack.back();
        stack.pop_back();
        for ( auto consumer : model.fanout( net ) )
        {
            if ( own[ consumer ] || seen_node[ consumer ] )
                continue;
            seen_node[ consumer ] = 1;
            cone.elements.push_back( consumer );
            auto out = model.nodes()[ consumer ].output;
            if ( !seen_net[ out ] )
            {
                seen_net[ out ] = 1;
                stack.push_back( out );
            }
        }
    }
    std::sort( cone.elements.begin(), cone.elements.end() );
    return cone;
}

FlatModel blackbox( const FlatModel& model, std::string_view instance )
{
    auto idx = model.find_instance( instance );
    if ( !idx )
        throw Error( ErrorCode::unknown_instance, "unknown instance " + std::string{ instance } );
    if ( model.instances()[ *idx ].blackboxed )
        return model;

    auto parts = model.parts();
    auto& inst = parts.instances[ *idx ];
    inst.blackboxed = true;

    std::erase_if( parts.nodes, [&]( const Node& n ) { return n.origin == *idx; } );

    auto bus_nets = std::set< NetId >{};
    for ( const auto& r : parts.registers )
    {
        if ( r.instance != *idx )
            continue;
        if ( r.write_enable != no_net )
            bus_nets.insert( r.write_enable );
        bus_nets.insert( r.write_data.begin(), r.write_data.end() );
    }
    std::erase_if( parts.registers, [&]( const FlatRegister& r ) { return r.instance == *idx; } );

    auto used = std::vector< char >( parts.net_count, 0 );
    for ( const auto& n : parts.nodes )
    {
        for ( auto in : n.inputs )
            used[ in ] = 1;
        if ( n.enable != no_net )
            used[ n.enable ] = 1;
        if ( n.reset != no_net )
            used[ n.reset ] = 1;
    }
    for ( const auto& port : parts.outputs )
    {
        for ( auto bit : port.bits )
            used[ bit ] = 1;
    }

    auto prefix = inst.name + ".";
    auto own_input = [&]( const FlatPort& p ) {
        if ( std::all_of( p.bits.begin(), p.bits.end(), [&]( NetId b ) { return bus_nets.count( b ) != 0; } ) )
            return true;
        if ( p.name.rfind( prefix, 0 ) != 0 )
            return false;
        return std::none_of( p.bits.begin(), p.bits.end(), [&]( NetId b ) { return used[ b ] != 0; } );
    };
    std::erase_if( parts.inputs, own_input );

    auto is_input = std::vector< char >( parts.net_count, 0 );
    for ( const auto& p : parts.inputs )
    {
        for ( auto bit : p.bits )
            is_input[ bit ] = 1;
    }
    for ( const auto& port : inst.ports )
    {
        if ( port.direction != SignalKind::output )
            continue;
        if ( std::any_of( port.bits.begin(), port.bits.end(), [&]( NetId b ) { return is_input[ b ] != 0; } ) )
            continue;
        parts.inputs.push_back( { prefix + port.name, port.bits } );
    }

    std::erase_if( parts.signals, [&]( const auto& entry ) {
        const auto& key = entry.first;
        if ( key.rfind( prefix, 0 ) != 0 )
            return false;
        auto local = std::string_view{ key }.substr( prefix.size() );
        return std::none_of( inst.ports.begin(), inst.ports.end(), [&]( const auto& p ) { return p.name == local; } );
    } );
    return FlatModel{ std::move( parts ) };
}

} // namespace hwv
