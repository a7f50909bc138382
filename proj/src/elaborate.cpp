#include "hwv/netlist.hpp"

#include <algorithm>
#include <numeric>

namespace hwv
{

namespace
{

class UnionFind
{
public:
    explicit UnionFind( std::size_t n ) : parent_( n ) { std::iota( parent_.begin(), parent_.end(), std::size_t{ 0 } ); }

    std::size_t add()
    {
        parent_.push_back( parent_.size() );
        return parent_.size() - 1;
    }

    std::size_t find( std::size_t x )
    {
        while ( parent_[ x ] != x )
        {
            parent_[ x ] = parent_[ parent_[ x ] ];
            x = parent_[ x ];
        }
        return x;
    }

    // Keeps the smaller representative so numbering follows declaration order.
    void unite( std::size_t a, std::size_t b )
    {
        a = find( a );
        b = find( b );
        if ( a == b )
            return;
        if ( b < a )
            std::swap( a, b );
        parent_[ b ] = a;
    }

    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector< std::size_t > parent_;
};

struct PortSlot
{
    const SignalDecl* decl = nullptr;
    std::size_t first = 0;
};

} // namespace

FlatModel elaborate( const Design& design, const Library& library )
{
    // Raw net space: every instance gets a private copy of its module's nets.
    auto modules = std::vector< const IpNetlist* >{};
    auto offsets = std::vector< std::size_t >{};
    auto total = std::size_t{ 0 };
    for ( const auto& inst : design.instances )
    {
        auto it = library.find( inst.module );
        if ( it == library.end() )
            throw Error( ErrorCode::unknown_module, "instance " + inst.name + " references unknown module " + inst.module );
        if ( std::count_if( design.instances.begin(), design.instances.end(),
                            [&]( const auto& i ) { return i.name == inst.name; } ) > 1 )
            throw Error( ErrorCode::duplicate_name, "duplicate instance " + inst.name );
        modules.push_back( &it->second );
        offsets.push_back( total );
        total += it->second.net_count;
    }
    auto uf = UnionFind{ total };

    auto slot_of = [&]( const PortRef& ref ) -> PortSlot {
        const auto* inst = design.find_instance( ref.instance );
        if ( inst == nullptr )
            throw Error( ErrorCode::unknown_instance, "unknown instance " + ref.instance );
        auto i = static_cast< std::size_t >( inst - design.instances.data() );
        const auto* decl = modules[ i ]->find_signal( ref.port );
        if ( decl == nullptr || !decl->is_port() )
            throw Error( ErrorCode::unknown_signal, "unknown port " + ref.instance + "." + ref.port );
        return { decl, offsets[ i ] + decl->first };
    };

    // Driven-ness of raw nets: instance outputs and top-level inputs drive.
    auto raw_driver_count = std::vector< int >( total, 0 );
    auto raw_sink = std::vector< char >( total, 0 );
    for ( std::size_t i = 0; i < design.instances.size(); ++i )
    {
        for ( const auto* port : modules[ i ]->ports() )
        {
            if ( port->kind != SignalKind::output )
                continue;
            for ( unsigned b = 0; b < port->width; ++b )
                raw_driver_count[ offsets[ i ] + port->bit( b ) ] = 1;
        }
    }

    for ( const auto& c : design.connections )
    {
        auto a = slot_of( c.a );
        auto b = slot_of( c.b );
        if ( a.decl->width != b.decl->width )
            throw Error( ErrorCode::width_mismatch, c.a.instance + "." + c.a.port + " (" + std::to_string( a.decl->width ) +
                                                        ") connected to " + c.b.instance + "." + c.b.port + " (" +
                                                        std::to_string( b.decl->width ) + ")" );
        for ( unsigned bit = 0; bit < a.decl->width; ++bit )
        {
            uf.unite( a.first + bit, b.first + bit );
            raw_sink[ a.first + bit ] = raw_sink[ b.first + bit ] = 1;
        }
    }

    struct TopPort
    {
        std::string name;
        SignalKind direction;
        unsigned width;
        std::size_t first;
    };
    auto top_ports = std::vector< TopPort >{};
    for ( const auto& t : design.top )
    {
        auto target = slot_of( t.target );
        auto it = std::find_if( top_ports.begin(), top_ports.end(), [&]( const auto& p ) { return p.name == t.port; } );
        if ( it == top_ports.end() )
        {
            auto first = uf.size();
            for ( unsigned b = 0; b < target.decl->width; ++b )
                uf.add();
            raw_driver_count.resize( uf.size(), 0 );
            raw_sink.resize( uf.size(), 0 );
            top_ports.push_back( { t.port, target.decl->kind, target.decl->width, first } );
            it = std::prev( top_ports.end() );
            if ( it->direction == SignalKind::input )
            {
                for ( unsigned b = 0; b < it->width; ++b )
                    raw_driver_count[ first + b ] = 1;
            }
        }
        if ( it->width != target.decl->width || it->direction != target.decl->kind )
            throw Error( ErrorCode::width_mismatch, "top port " + t.port + " bound to incompatible ports" );
        for ( unsigned b = 0; b < it->width; ++b )
        {
            uf.unite( it->first + b, target.first + b );
            raw_sink[ target.first + b ] = 1;
        }
    }

    // Compact numbering over equivalence classes.
    auto class_drivers = std::vector< int >( uf.size(), 0 );
    for ( std::size_t n = 0; n < uf.size(); ++n )
        class_drivers[ uf.find( n ) ] += raw_driver_count[ n ];
    auto compact = std::vector< NetId >( uf.size(), no_net );
    auto parts = FlatModel::Parts{};
    parts.name = design.name;
    auto net_of = [&]( std::size_t raw ) {
        auto rep = uf.find( raw );
        if ( compact[ rep ] == no_net )
        {
            if ( class_drivers[ rep ] > 1 )
                throw Error( ErrorCode::multiple_drivers, "interconnect net has " + std::to_string( class_drivers[ rep ] ) +
                                                              " drivers" );
            compact[ rep ] = parts.net_count++;
            parts.net_names.emplace_back();
        }
        return compact[ rep ];
    };
    auto name_net = [&]( NetId net, const std::string& name ) {
        if ( parts.net_names[ net ].empty() )
            parts.net_names[ net ] = name;
    };

    for ( const auto& tp : top_ports )
    {
        auto bits = std::vector< NetId >{};
        for ( unsigned b = 0; b < tp.width; ++b )
        {
            bits.push_back( net_of( tp.first + b ) );
            name_net( bits.back(), tp.name + "[" + std::to_string( b ) + "]" );
        }
        parts.signals[ tp.name ] = bits;
        if ( tp.direction == SignalKind::input )
            parts.inputs.push_back( { tp.name, bits } );
        else
            parts.outputs.push_back( { tp.name, bits } );
    }

    for ( std::uint32_t i = 0; i < design.instances.size(); ++i )
    {
        const auto& inst = design.instances[ i ];
        const auto& ip = *modules[ i ];
        auto prefix = inst.name + ".";
        auto flat = FlatInstance{ inst.name, inst.module, {}, false };
        for ( const auto& s : ip.signals )
        {
            auto bits = std::vector< NetId >{};
            for ( unsigned b = 0; b < s.width; ++b )
            {
                bits.push_back( net_of( offsets[ i ] + s.bit( b ) ) );
                name_net( bits.back(), prefix + s.name + "[" + std::to_string( b ) + "]" );
            }
            parts.signals[ prefix + s.name ] = bits;
            if ( !s.is_port() )
                continue;
            flat.ports.push_back( { s.name, s.kind, bits } );

            auto first_raw = offsets[ i ] + s.first;
            if ( s.kind == SignalKind::input && class_drivers[ uf.find( first_raw ) ] == 0 )
            {
                auto already = std::any_of( parts.inputs.begin(), parts.inputs.end(),
                                            [&]( const auto& p ) { return p.bits.front() == bits.front(); } );
                if ( !already )
                    parts.inputs.push_back( { prefix + s.name, bits } );
            }
            if ( s.kind == SignalKind::output && !raw_sink[ first_raw ] )
                parts.outputs.push_back( { prefix + s.name, bits } );
        }
        parts.instances.push_back( std::move( flat ) );

        for ( auto node : ip.nodes )
        {
            node.output = net_of( offsets[ i ] + node.output );
            for ( auto& in : node.inputs )
                in = net_of( offsets[ i ] + in );
            if ( node.enable != no_net )
                node.enable = net_of( offsets[ i ] + node.enable );
            if ( node.reset != no_net )
                node.reset = net_of( offsets[ i ] + node.reset );
            node.origin = i;
            parts.nodes.push_back( std::move( node ) );
        }
    }

    // Registers, with the bus write port for software-visible ones.
    auto fresh = [&]( const std::string& name ) {
        parts.net_names.push_back( name );
        return parts.net_count++;
    };
    auto driver_of = std::vector< std::size_t >( parts.net_count, no_node );
    for ( std::size_t k = 0; k < parts.nodes.size(); ++k )
        driver_of[ parts.nodes[ k ].output ] = k;

    for ( std::uint32_t i = 0; i < design.instances.size(); ++i )
    {
        const auto& inst = design.instances[ i ];
        for ( const auto& reg : modules[ i ]->registers )
        {
            auto flat = FlatRegister{};
            flat.name = inst.name + "." + reg.name;
            flat.instance = i;
            flat.software_visible = reg.software_visible;
            for ( auto bit : reg.bits )
                flat.bits.push_back( net_of( offsets[ i ] + bit ) );
            if ( reg.software_visible )
            {
                flat.write_enable = fresh( flat.name + "$we" );
                for ( unsigned b = 0; b < reg.width; ++b )
                    flat.write_data.push_back( fresh( flat.name + "$wdata[" + std::to_string( b ) + "]" ) );
                parts.inputs.push_back( { flat.name + "$we", { flat.write_enable } } );
                parts.inputs.push_back( { flat.name + "$wdata", flat.write_data } );
                parts.signals[ flat.name + "$we" ] = { flat.write_enable };
                parts.signals[ flat.name + "$wdata" ] = flat.write_data;
                for ( unsigned b = 0; b < reg.width; ++b )
                {
                    auto dff_index = driver_of.at( flat.bits[ b ] );
                    auto d = parts.nodes[ dff_index ].inputs.at( 0 );
                    auto enable = parts.nodes[ dff_index ].enable;
                    auto muxed = fresh( flat.name + "$d[" + std::to_string( b ) + "]" );
                    parts.nodes.push_back( Node{ NodeKind::mux, muxed, { flat.write_enable, d, flat.write_data[ b ] },
                                                 Tri::x, no_net, no_net, Tri::x, i } );
                    auto new_enable = no_net;
                    if ( enable != no_net )
                    {
                        new_enable = fresh( flat.name + "$en[" + std::to_string( b ) + "]" );
                        parts.nodes.push_back( Node{ NodeKind::or_gate, new_enable, { enable, flat.write_enable },
                                                     Tri::x, no_net, no_net, Tri::x, i } );
                    }
                    auto& dff = parts.nodes[ dff_index ];
                    dff.inputs[ 0 ] = muxed;
                    dff.enable = new_enable;
                }
            }
            parts.registers.push_back( std::move( flat ) );
        }
    }
    return FlatModel{ std::move( parts ) };
}

} // namespace hwv
