#include "hwv/sim.hpp"

#include <algorithm>
#include <sstream>

namespace hwv
{

std::vector< Tri > initial_values( const FlatModel& model )
{
    auto values = std::vector< Tri >( model.net_count(), Tri::x );
    for ( auto i : model.dff_nodes() )
    {
        const auto& node = model.nodes()[ i ];
        values[ node.output ] = node.value;
    }
    return values;
}

void evaluate( const FlatModel& model, std::vector< Tri >& values )
{
    const auto& nodes = model.nodes();
    for ( auto i : model.comb_order() )
    {
        const auto& n = nodes[ i ];
        auto in = [&]( std::size_t k ) { return values[ n.inputs[ k ] ]; };
        auto& out = values[ n.output ];
        switch ( n.kind )
        {
        case NodeKind::and_gate: out = tri_and( in( 0 ), in( 1 ) ); break;
        case NodeKind::or_gate: out = tri_or( in( 0 ), in( 1 ) ); break;
        case NodeKind::xor_gate: out = tri_xor( in( 0 ), in( 1 ) ); break;
        case NodeKind::not_gate: out = tri_not( in( 0 ) ); break;
        case NodeKind::mux: out = tri_mux( in( 0 ), in( 1 ), in( 2 ) ); break;
        case NodeKind::constant: out = n.value; break;
        case NodeKind::dff: break;
        }
    }
}

void clock( const FlatModel& model, std::vector< Tri >& values )
{
    const auto& nodes = model.nodes();
    auto next = std::vector< Tri >{};
    next.reserve( model.state_bits() );
    for ( auto i : model.dff_nodes() )
    {
        const auto& n = nodes[ i ];
        auto q = values[ n.output ];
        auto loaded = n.enable == no_net ? values[ n.inputs[ 0 ] ] : tri_mux( values[ n.enable ], q, values[ n.inputs[ 0 ] ] );
        next.push_back( n.reset == no_net ? loaded : tri_mux( values[ n.reset ], loaded, n.reset_value ) );
    }
    auto k = std::size_t{ 0 };
    for ( auto i : model.dff_nodes() )
        values[ nodes[ i ].output ] = next[ k++ ];
}

std::string bits_string( const std::vector< Tri >& values, const std::vector< NetId >& bits )
{
    auto s = std::string{};
    for ( auto it = bits.rbegin(); it != bits.rend(); ++it )
        s.push_back( tri_char( values[ *it ] ) );
    return s;
}

PoiSet set_pois( const RegisterMap& map, const std::vector< std::string >& ranked, const EswScript& script )
{
    auto pois = PoiSet{};
    for ( std::size_t i = 0; i < script.statements.size(); ++i )
    {
        const auto& s = script.statements[ i ];
        if ( !s.accesses_bus() )
            continue;
        const auto* entry = map.find( s.address );
        if ( entry != nullptr && std::find( ranked.begin(), ranked.end(), entry->reg ) != ranked.end() )
            pois.push_back( { i, s.address, entry->reg } );
    }
    return pois;
}

Simulator::Simulator( const FlatModel& model, const RegisterMap& map, std::uint64_t seed )
    : model_( model ), map_( map ), seed_( seed )
{
    is_reset_.assign( model.net_count(), 0 );
    is_bus_.assign( model.net_count(), 0 );
    for ( auto net : model.reset_inputs() )
        is_reset_[ net ] = 1;
    for ( const auto& r : model.registers() )
    {
        if ( r.write_enable != no_net )
            is_bus_[ r.write_enable ] = 1;
        for ( auto b : r.write_data )
            is_bus_[ b ] = 1;
    }
    for ( const auto& port : model.inputs() )
    {
        for ( auto b : port.bits )
        {
            if ( !is_reset_[ b ] && !is_bus_[ b ] )
                random_inputs_.push_back( b );
        }
    }
}

SimState Simulator::start() const
{
    auto state = SimState{};
    state.values = initial_values( model_ );
    state.rng.seed( seed_ );
    return state;
}

void Simulator::step( const EswStatement& stmt, std::size_t index, SimState& state )
{
    auto& v = state.values;
    for ( auto net : random_inputs_ )
        v[ net ] = tri_of( ( state.rng() & 1u ) != 0 );
    for ( auto net : model_.reset_inputs() )
        v[ net ] = tri_of( stmt.op == EswOp::reset );
    for ( const auto& r : model_.registers() )
    {
        if ( r.write_enable == no_net )
            continue;
        v[ r.write_enable ] = Tri::zero;
        for ( auto b : r.write_data )
            v[ b ] = Tri::zero;
    }
    if ( stmt.accesses_bus() )
    {
        const auto* entry = map_.find( stmt.address );
        if ( entry == nullptr )
        {
            auto message = std::ostringstream{};
            message << "BusDecodeError: " << ( stmt.op == EswOp::write ? "write" : "read" ) << " to unmapped address 0x"
                    << std::hex << stmt.address;
            diagnostics_.push_back( { state.cycle, index, stmt.address, message.str() } );
        }
        else if ( stmt.op == EswOp::write )
        {
            // Registers of instances outside this model are simply not driven.
            if ( const auto* reg = model_.find_register( entry->reg ); reg != nullptr && reg->write_enable != no_net )
            {
                v[ reg->write_enable ] = Tri::one;
                for ( std::size_t b = 0; b < reg->write_data.size(); ++b )
                    v[ reg->write_data[ b ] ] = tri_of( b < 32 && ( ( stmt.value >> b ) & 1u ) );
            }
        }
    }
    evaluate( model_, v );
    write_dump( state );
    clock( model_, v );
    ++state.cycle;
}

SimEvent Simulator::run_until_poi( const EswScript& script, const PoiSet& pois, SimState& state )
{
    while ( state.pc < script.statements.size() )
    {
        const auto& stmt = script.statements[ state.pc ];
        if ( state.remaining == 0 )
            state.remaining = stmt.accesses_bus() ? 1 : stmt.cycles;
        step( stmt, state.pc, state );
        if ( --state.remaining != 0 )
            continue;
        auto index = state.pc++;
        auto it = std::find_if( pois.begin(), pois.end(), [&]( const Poi& p ) { return p.statement == index; } );
        if ( it != pois.end() )
            return { SimEvent::Kind::triggered, *it };
    }
    return { SimEvent::Kind::script_ended, {} };
}

void Simulator::write_dump( const SimState& state )
{
    if ( dump_ == nullptr )
        return;
    auto emit = [&]( const std::string& name, const std::vector< NetId >& bits ) {
        auto value = bits_string( state.values, bits );
        auto& last = last_dump_[ name ];
        if ( last != value )
        {
            *dump_ << state.cycle << " " << name << " " << value << "\n";
            last = value;
        }
    };
    for ( const auto& p : model_.inputs() )
        emit( p.name, p.bits );
    for ( const auto& r : model_.registers() )
        emit( r.name, r.bits );
    for ( const auto& p : model_.outputs() )
        emit( p.name, p.bits );
}

CapturedValues collect_sim_values( const FlatModel& model, const SimState& state, const std::vector< std::string >& registers )
{
    auto captured = CapturedValues{};
    captured.cycle = state.cycle;
    for ( const auto& name : registers )
    {
        const auto* reg = model.find_register( name );
        if ( reg == nullptr )
            continue;
        auto bits = std::vector< bool >{};
        auto known = true;
        for ( auto b : reg->bits )
        {
            auto t = state.values.at( b );
            known = known && is_known( t );
            bits.push_back( t == Tri::one );
        }
        if ( known )
            captured.values[ name ] = std::move( bits );
    }
    return captured;
}

} // namespace hwv
