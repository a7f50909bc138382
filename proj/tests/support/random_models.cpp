#include "random_models.hpp"

#include <sstream>

using namespace hwv;

namespace gen
{

namespace
{

unsigned pick( std::mt19937_64& rng, unsigned n ) { return static_cast< unsigned >( rng() % n ); }

bool chance( std::mt19937_64& rng, double p ) { return std::uniform_real_distribution< double >{ 0, 1 }( rng ) < p; }

struct Builder
{
    std::mt19937_64& rng;
    std::ostringstream decl;
    std::ostringstream body;
    std::vector< std::string > pool;
    // Register name and width.
    std::vector< std::pair< std::string, unsigned > > regs;

    const std::string& any() { return pool[ pick( rng, static_cast< unsigned >( pool.size() ) ) ]; }

    void registers( unsigned count, unsigned max_width, unsigned max_bits, bool allow_init )
    {
        auto bits = 0u;
        for ( unsigned r = 0; r < count; ++r )
        {
            auto w = 1 + pick( rng, max_width );
            if ( bits + w > max_bits )
                break;
            bits += w;
            auto name = "r" + std::to_string( r );
            decl << ".reg " << name << " " << w;
            if ( allow_init && chance( rng, 0.6 ) )
                decl << " init=" << ( rng() & ( ( 1u << w ) - 1 ) );
            decl << "\n";
            regs.emplace_back( name, w );
            for ( unsigned b = 0; b < w; ++b )
                pool.push_back( name + "[" + std::to_string( b ) + "]" );
        }
    }

    void gates( unsigned count, unsigned outputs )
    {
        for ( unsigned g = 0; g < count; ++g )
        {
            auto name = "g" + std::to_string( g );
            auto is_out = g + outputs >= count || chance( rng, 0.1 );
            decl << ( is_out ? ".output " : ".wire " ) << name << " 1\n";
            auto kind = pick( rng, 11 );
            if ( kind == 10 )
            {
                body << ".const " << name << " " << ( rng() & 1u ) << "\n";
            }
            else if ( kind < 3 )
            {
                body << ".gate AND " << name << " " << any() << " " << any() << "\n";
            }
            else if ( kind < 5 )
            {
                body << ".gate OR " << name << " " << any() << " " << any() << "\n";
            }
            else if ( kind < 7 )
            {
                body << ".gate XOR " << name << " " << any() << " " << any() << "\n";
            }
            else if ( kind < 8 )
            {
                body << ".gate NOT " << name << " " << any() << "\n";
            }
            else
            {
                auto s = any();
                auto a = any();
                body << ".gate MUX " << name << " " << s << " " << a << " " << any() << "\n";
            }
            pool.push_back( name );
        }
    }

    void dffs( double enable_rate, double reset_rate )
    {
        for ( const auto& [name, w] : regs )
        {
            auto en = chance( rng, enable_rate ) ? " en=" + any() : std::string{};
            auto rst = chance( rng, reset_rate );
            for ( unsigned b = 0; b < w; ++b )
            {
                body << ".dff " << name << "[" << b << "] " << any() << en;
                if ( rst )
                    body << " rst=rst rstval=" << ( rng() & 1u );
                body << "\n";
            }
        }
    }

    std::string text( const std::string& module )
    {
        return ".module " + module + "\n" + decl.str() + body.str() + ".endmodule\n";
    }
};

} // namespace

RandomCase wrap( const std::string& netlist_text, const std::string& instance )
{
    auto c = RandomCase{};
    c.netlist = netlist_text;
    auto ip = parse_netlist( netlist_text );
    c.design = parse_design( ".design d\n.instance " + ip.name + " " + instance + "\n" );
    for ( const auto& r : ip.registers )
        c.registers.push_back( instance + "." + r.name );
    c.library.emplace( ip.name, std::move( ip ) );
    c.model = elaborate( c.design, c.library );
    return c;
}

RandomCase random_case( std::mt19937_64& rng, const ModelShape& shape )
{
    auto b = Builder{ rng, {}, {}, {}, {} };
    b.decl << ".input rst 1\n";
    for ( unsigned i = 0; i < shape.input_bits; ++i )
    {
        b.decl << ".input i" << i << " 1\n";
        b.pool.push_back( "i" + std::to_string( i ) );
    }
    b.registers( 1 + pick( rng, shape.max_registers ), shape.max_register_width, shape.max_state_bits, true );
    b.gates( shape.gates, shape.outputs );
    b.dffs( shape.enable_rate, shape.reset_rate );
    auto c = wrap( b.text( "rnd" ) );

    // Properties over single bits and whole registers.
    auto sig = [&] { return "m." + b.any(); };
    auto text = std::ostringstream{};
    for ( unsigned p = 0; p < shape.properties; ++p )
    {
        text << "prop p" << p << " : ";
        switch ( pick( rng, 7 ) )
        {
        case 0: text << sig() << " == " << sig(); break;
        case 1: text << sig() << " != " << sig(); break;
        case 2: text << sig() << " | " << sig(); break;
        case 3: text << "~(" << sig() << " & " << sig() << ")"; break;
        case 4: text << sig() << " -> " << sig(); break;
        default:
        {
            const auto& [name, w] = b.regs[ pick( rng, static_cast< unsigned >( b.regs.size() ) ) ];
            text << "m." << name << ( pick( rng, 2 ) == 0 ? " != " : " == " ) << ( rng() & ( ( 1u << w ) - 1 ) );
        }
        }
        text << "\n";
    }
    c.props = parse_props( text.str(), c.design, c.library );
    auto x = generate_xprops( c.design, c.library, pick( rng, 3 ) );
    c.props.insert( c.props.end(), x.begin(), x.end() );
    return c;
}

std::string random_dag_netlist( std::mt19937_64& rng, unsigned max_nodes )
{
    auto b = Builder{ rng, {}, {}, {}, {} };
    b.decl << ".input rst 1\n";
    auto inputs = 1 + pick( rng, 3 );
    for ( unsigned i = 0; i < inputs; ++i )
    {
        b.decl << ".input i" << i << " 1\n";
        b.pool.push_back( "i" + std::to_string( i ) );
    }
    b.registers( 1 + pick( rng, 3 ), 3, 64, false );
    b.gates( 1 + pick( rng, max_nodes ), 1 + pick( rng, 3 ) );
    b.dffs( 0.3, 0.3 );
    return b.text( "dag" );
}

} // namespace gen
