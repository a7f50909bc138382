#include "hwv/property.hpp"

#include <algorithm>
#include <bit>

namespace hwv
{

namespace
{

struct Operand
{
    std::vector< NetId > bits;
    bool unsized = false;
    std::uint64_t value = 0;
};

unsigned bit_length( std::uint64_t v ) { return std::max( 1u, static_cast< unsigned >( std::bit_width( v ) ) ); }

class MonitorBuilder
{
public:
    explicit MonitorBuilder( FlatModel::Parts& parts ) : parts_( parts ) {}

    void set_prefix( std::string prefix )
    {
        prefix_ = std::move( prefix );
        counter_ = 0;
    }

    NetId fresh()
    {
        parts_.net_names.push_back( prefix_ + "." + std::to_string( counter_++ ) );
        return parts_.net_count++;
    }

    NetId constant( bool bit )
    {
        auto& slot = bit ? one_ : zero_;
        if ( slot == no_net )
        {
            parts_.net_names.push_back( bit ? "$const1" : "$const0" );
            slot = parts_.net_count++;
            parts_.nodes.push_back( Node{ NodeKind::constant, slot, {}, tri_of( bit ), no_net, no_net, Tri::x, no_origin } );
        }
        return slot;
    }

    NetId gate( NodeKind kind, std::vector< NetId > inputs )
    {
        auto out = fresh();
        parts_.nodes.push_back( Node{ kind, out, std::move( inputs ), Tri::x, no_net, no_net, Tri::x, no_origin } );
        return out;
    }

    NetId and_( NetId a, NetId b ) { return gate( NodeKind::and_gate, { a, b } ); }
    NetId or_( NetId a, NetId b ) { return gate( NodeKind::or_gate, { a, b } ); }
    NetId xor_( NetId a, NetId b ) { return gate( NodeKind::xor_gate, { a, b } ); }
    NetId not_( NetId a ) { return gate( NodeKind::not_gate, { a } ); }

    std::vector< NetId > materialize( const Operand& op, unsigned width )
    {
        if ( !op.unsized )
        {
            auto bits = op.bits;
            while ( bits.size() < width )
                bits.push_back( constant( false ) );
            return bits;
        }
        auto bits = std::vector< NetId >{};
        for ( unsigned i = 0; i < width; ++i )
            bits.push_back( constant( i < 64 && ( ( op.value >> i ) & 1u ) ) );
        return bits;
    }

    Operand compile( const Expr& e )
    {
        switch ( e.op )
        {
        case Expr::Op::signal: return { resolve( e ), false, 0 };
        case Expr::Op::literal: return { {}, true, e.value };
        case Expr::Op::bit_not:
        {
            auto a = compile( e.args[ 0 ] );
            auto bits = materialize( a, width_of( a ) );
            for ( auto& b : bits )
                b = not_( b );
            return { bits, false, 0 };
        }
        default: break;
        }

        auto a = compile( e.args[ 0 ] );
        auto b = compile( e.args[ 1 ] );
        auto width = std::max( width_of( a ), width_of( b ) );
        auto x = materialize( a, width );
        auto y = materialize( b, width );
        auto bits = std::vector< NetId >{};
        switch ( e.op )
        {
        case Expr::Op::bit_and:
            for ( unsigned i = 0; i < width; ++i )
                bits.push_back( and_( x[ i ], y[ i ] ) );
            break;
        case Expr::Op::bit_or:
            for ( unsigned i = 0; i < width; ++i )
                bits.push_back( or_( x[ i ], y[ i ] ) );
            break;
        case Expr::Op::implies:
            for ( unsigned i = 0; i < width; ++i )
                bits.push_back( or_( not_( x[ i ] ), y[ i ] ) );
            break;
        case Expr::Op::eq: bits.push_back( equal( x, y ) ); break;
        case Expr::Op::ne: bits.push_back( not_( equal( x, y ) ) ); break;
        case Expr::Op::lt: bits.push_back( less( x, y ) ); break;
        case Expr::Op::gt: bits.push_back( less( y, x ) ); break;
        case Expr::Op::le: bits.push_back( not_( less( y, x ) ) ); break;
        case Expr::Op::ge: bits.push_back( not_( less( x, y ) ) ); break;
        default: break;
        }
        return { bits, false, 0 };
    }

private:
    static unsigned width_of( const Operand& op )
    {
        return op.unsized ? bit_length( op.value ) : static_cast< unsigned >( op.bits.size() );
    }

    std::vector< NetId > resolve( const Expr& e ) const
    {
        const auto* bits = find( e.signal );
        if ( bits == nullptr )
            throw Error( ErrorCode::unknown_signal, "unknown signal '" + e.signal + "'" );
        if ( !e.slice )
            return *bits;
        auto [hi, lo] = *e.slice;
        if ( hi >= bits->size() )
            throw Error( ErrorCode::width_mismatch, "slice out of range for '" + e.signal + "'" );
        return { bits->begin() + lo, bits->begin() + hi + 1 };
    }

    const std::vector< NetId >* find( const std::string& name ) const
    {
        auto it = parts_.signals.find( name );
        return it == parts_.signals.end() ? nullptr : &it->second;
    }

    NetId equal( const std::vector< NetId >& x, const std::vector< NetId >& y )
    {
        auto acc = no_net;
        for ( std::size_t i = 0; i < x.size(); ++i )
        {
            auto same = not_( xor_( x[ i ], y[ i ] ) );
            acc = acc == no_net ? same : and_( acc, same );
        }
        return acc;
    }

    // Unsigned x < y, rippled from the LSB.
    NetId less( const std::vector< NetId >& x, const std::vector< NetId >& y )
    {
        auto lt = constant( false );
        for ( std::size_t i = 0; i < x.size(); ++i )
        {
            auto strictly = and_( not_( x[ i ] ), y[ i ] );
            auto same = not_( xor_( x[ i ], y[ i ] ) );
            lt = or_( strictly, and_( same, lt ) );
        }
        return lt;
    }

    FlatModel::Parts& parts_;
    std::string prefix_;
    unsigned counter_ = 0;
    NetId zero_ = no_net;
    NetId one_ = no_net;
};

} // namespace

MonitoredModel compile_properties( const FlatModel& model, const std::vector< PropertyAst >& props, unsigned reset_cycles )
{
    auto parts = model.parts();
    auto builder = MonitorBuilder{ parts };
    auto monitors = std::vector< Monitor >{};
    for ( const auto& p : props )
    {
        auto m = Monitor{};
        m.name = p.name;
        m.kind = p.kind;
        if ( p.kind == PropertyKind::xprop )
        {
            const auto* reg = model.find_register( p.xprop_register );
            if ( reg == nullptr )
                throw Error( ErrorCode::unknown_register, "property " + p.name + ": unknown register " + p.xprop_register );
            m.watched = reg->bits;
            m.first_cycle = reset_cycles + p.settle;
        }
        else
        {
            builder.set_prefix( "$prop." + p.name );
            try
            {
                auto result = builder.compile( p.expression );
                if ( result.unsized )
                    result.bits = builder.materialize( result, bit_length( result.value ) );
                if ( result.bits.size() != 1 )
                    throw Error( ErrorCode::width_mismatch, "expression is " + std::to_string( result.bits.size() ) +
                                                                " bits wide, expected 1" );
                m.net = result.bits.front();
            }
            catch ( const Error& e )
            {
                throw Error( e.code(), "property " + p.name + ": " + e.what() );
            }
        }
        monitors.push_back( std::move( m ) );
    }
    return { FlatModel{ std::move( parts ) }, std::move( monitors ) };
}

bool violated( const Monitor& monitor, const std::vector< Tri >& values, unsigned cycle )
{
    if ( monitor.kind == PropertyKind::user )
        return values.at( monitor.net ) == Tri::zero;
    if ( cycle < monitor.first_cycle )
        return false;
    return std::any_of( monitor.watched.begin(), monitor.watched.end(),
                        [&]( NetId n ) { return values.at( n ) == Tri::x; } );
}

} // namespace hwv
