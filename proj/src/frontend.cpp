#include "hwv/frontend.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hwv
{

namespace
{

struct Token
{
    std::string_view text;
    unsigned column = 0;
};

struct Line
{
    unsigned number = 0;
    std::vector< Token > tokens;
};

// Splits into whitespace-separated tokens, dropping `#` comments.
std::vector< Line > tokenize( std::string_view text )
{
    auto lines = std::vector< Line >{};
    auto number = 0u;
    auto start = std::size_t{ 0 };
    while ( start <= text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos )
            end = text.size();
        auto raw = text.substr( start, end - start );
        ++number;
        if ( auto hash = raw.find( '#' ); hash != std::string_view::npos )
            raw = raw.substr( 0, hash );
        auto line = Line{ number, {} };
        auto i = std::size_t{ 0 };
        while ( i < raw.size() )
        {
            while ( i < raw.size() && std::isspace( static_cast< unsigned char >( raw[ i ] ) ) )
                ++i;
            auto j = i;
            while ( j < raw.size() && !std::isspace( static_cast< unsigned char >( raw[ j ] ) ) )
                ++j;
            if ( j > i )
                line.tokens.push_back( { raw.substr( i, j - i ), static_cast< unsigned >( i + 1 ) } );
            i = j;
        }
        if ( !line.tokens.empty() )
            lines.push_back( std::move( line ) );
        if ( end == text.size() )
            break;
        start = end + 1;
    }
    return lines;
}

[[noreturn]] void fail( ErrorCode code, const std::string& message, const Line& line, const Token& token )
{
    throw Error( code, message, line.number, token.column );
}

[[noreturn]] void fail( const std::string& message, const Line& line, const Token& token )
{
    fail( ErrorCode::syntax_error, message, line, token );
}

bool is_identifier( std::string_view s )
{
    if ( s.empty() || std::isdigit( static_cast< unsigned char >( s.front() ) ) )
        return false;
    return std::all_of( s.begin(), s.end(), []( char c ) {
        return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' || c == '$';
    } );
}

std::optional< std::uint64_t > parse_number( std::string_view s, int base )
{
    if ( s.empty() )
        return std::nullopt;
    auto value = std::uint64_t{ 0 };
    auto [ptr, ec] = std::from_chars( s.data(), s.data() + s.size(), value, base );
    if ( ec != std::errc{} || ptr != s.data() + s.size() )
        return std::nullopt;
    return value;
}

/// `0x..` hex, `0b..` binary, otherwise decimal.
std::optional< std::uint64_t > parse_value( std::string_view s )
{
    if ( s.size() > 2 && s[ 0 ] == '0' && ( s[ 1 ] == 'x' || s[ 1 ] == 'X' ) )
        return parse_number( s.substr( 2 ), 16 );
    if ( s.size() > 2 && s[ 0 ] == '0' && ( s[ 1 ] == 'b' || s[ 1 ] == 'B' ) )
        return parse_number( s.substr( 2 ), 2 );
    return parse_number( s, 10 );
}

std::optional< std::uint64_t > parse_hex( std::string_view s )
{
    if ( s.size() > 2 && s[ 0 ] == '0' && ( s[ 1 ] == 'x' || s[ 1 ] == 'X' ) )
        s = s.substr( 2 );
    return parse_number( s, 16 );
}

unsigned parse_width( const Line& line, const Token& token )
{
    auto w = parse_number( token.text, 10 );
    if ( !w || *w == 0 || *w > 4096 )
        fail( "expected a width between 1 and 4096", line, token );
    return static_cast< unsigned >( *w );
}

bool fits( std::uint64_t value, unsigned width )
{
    return width >= 64 || value < ( std::uint64_t{ 1 } << width );
}

std::string hex( std::uint64_t value )
{
    auto out = std::ostringstream{};
    out << "0x" << std::hex << value;
    return out.str();
}

// ---------------------------------------------------------------------------
// Netlist

class NetlistBuilder
{
public:
    explicit NetlistBuilder( std::string name ) { ip_.name = std::move( name ); }

    void declare( const Line& line, const Token& name, SignalKind kind, unsigned width )
    {
        if ( !is_identifier( name.text ) )
            fail( "invalid identifier '" + std::string{ name.text } + "'", line, name );
        if ( ip_.find_signal( name.text ) != nullptr )
            fail( ErrorCode::duplicate_name, "signal '" + std::string{ name.text } + "' declared twice", line, name );
        ip_.signals.push_back( { std::string{ name.text }, kind, width, ip_.net_count } );
        ip_.net_count += width;
    }

    void declare_reg( const Line& line, const Token& name, unsigned width, std::vector< Tri > init, bool sw )
    {
        const auto* existing = ip_.find_signal( name.text );
        if ( existing != nullptr )
        {
            if ( existing->kind != SignalKind::output || existing->width != width || ip_.find_register( name.text ) )
                fail( ErrorCode::duplicate_name, "register '" + std::string{ name.text } + "' clashes with a declaration",
                      line, name );
        }
        else
        {
            declare( line, name, SignalKind::reg, width );
        }
        const auto* sig = ip_.find_signal( name.text );
        auto reg = RegisterDecl{ sig->name, width, {}, std::move( init ), sw };
        for ( unsigned i = 0; i < width; ++i )
            reg.bits.push_back( sig->bit( i ) );
        ip_.registers.push_back( std::move( reg ) );
    }

    /// `name`, `name[i]` or `name[hi:lo]`, LSB first.
    std::vector< NetId > resolve( const Line& line, const Token& token ) const
    {
        auto text = token.text;
        auto bracket = text.find( '[' );
        auto name = text.substr( 0, bracket );
        const auto* sig = ip_.find_signal( name );
        if ( sig == nullptr )
            fail( ErrorCode::unknown_signal, "unknown signal '" + std::string{ name } + "'", line, token );
        auto lo = 0u;
        auto hi = sig->width - 1;
        if ( bracket != std::string_view::npos )
        {
            if ( text.back() != ']' )
                fail( "malformed bit select", line, token );
            auto inner = text.substr( bracket + 1, text.size() - bracket - 2 );
            auto colon = inner.find( ':' );
            auto a = parse_number( inner.substr( 0, colon ), 10 );
            auto b = colon == std::string_view::npos ? a : parse_number( inner.substr( colon + 1 ), 10 );
            if ( !a || !b || *a < *b || *a >= sig->width )
                fail( "bit select out of range for '" + sig->name + "'", line, token );
            hi = static_cast< unsigned >( *a );
            lo = static_cast< unsigned >( *b );
        }
        auto bits = std::vector< NetId >{};
        for ( auto i = lo; i <= hi; ++i )
            bits.push_back( sig->bit( i ) );
        return bits;
    }

    SignalKind kind_of( NetId net ) const
    {
        for ( const auto& s : ip_.signals )
        {
            if ( net >= s.first && net < s.first + s.width )
                return s.kind;
        }
        return SignalKind::wire;
    }

    bool is_register_bit( NetId net ) const
    {
        return std::any_of( ip_.registers.begin(), ip_.registers.end(), [&]( const auto& r ) {
            return std::find( r.bits.begin(), r.bits.end(), net ) != r.bits.end();
        } );
    }

    Tri init_of( NetId net ) const
    {
        for ( const auto& r : ip_.registers )
        {
            for ( std::size_t i = 0; i < r.bits.size(); ++i )
            {
                if ( r.bits[ i ] == net )
                    return r.init[ i ];
            }
        }
        return Tri::x;
    }

    void add( Node node ) { ip_.nodes.push_back( std::move( node ) ); }

    IpNetlist finish()
    {
        std::sort( ip_.registers.begin(), ip_.registers.end(),
                   []( const auto& a, const auto& b ) { return a.bits.front() < b.bits.front(); } );
        validate( ip_ );
        return std::move( ip_ );
    }

private:
    IpNetlist ip_;
};

void parse_module_line( NetlistBuilder& b, const Line& line )
{
    const auto& t = line.tokens;
    auto kw = t[ 0 ].text;
    auto need = [&]( std::size_t n ) {
        if ( t.size() < n )
            fail( "too few operands for " + std::string{ kw }, line, t.back() );
    };

    if ( kw == ".input" || kw == ".output" || kw == ".wire" )
    {
        need( 3 );
        if ( t.size() > 3 )
            fail( "unexpected token", line, t[ 3 ] );
        auto kind = kw == ".input" ? SignalKind::input : kw == ".output" ? SignalKind::output : SignalKind::wire;
        b.declare( line, t[ 1 ], kind, parse_width( line, t[ 2 ] ) );
        return;
    }
    if ( kw == ".reg" )
    {
        need( 3 );
        auto width = parse_width( line, t[ 2 ] );
        auto init = std::vector< Tri >( width, Tri::x );
        auto sw = false;
        for ( std::size_t i = 3; i < t.size(); ++i )
        {
            auto opt = t[ i ].text;
            if ( opt == "sw" )
            {
                sw = true;
            }
            else if ( opt.rfind( "init=", 0 ) == 0 )
            {
                auto v = opt.substr( 5 );
                if ( v == "x" || v == "X" )
                    continue;
                auto value = parse_value( v );
                if ( !value )
                    fail( "bad init value", line, t[ i ] );
                if ( !fits( *value, width ) )
                    fail( ErrorCode::width_overflow, "init value does not fit the register", line, t[ i ] );
                for ( unsigned k = 0; k < width; ++k )
                    init[ k ] = tri_of( k < 64 && ( ( *value >> k ) & 1u ) );
            }
            else
            {
                fail( "unknown register option '" + std::string{ opt } + "'", line, t[ i ] );
            }
        }
        b.declare_reg( line, t[ 1 ], width, std::move( init ), sw );
        return;
    }
    if ( kw == ".gate" )
    {
        need( 4 );
        auto kind = node_kind_from_name( t[ 1 ].text );
        if ( !kind || *kind == NodeKind::constant || *kind == NodeKind::dff )
            fail( "unknown gate kind '" + std::string{ t[ 1 ].text } + "'", line, t[ 1 ] );
        if ( t.size() != 3 + arity( *kind ) )
            fail( std::string{ node_kind_name( *kind ) } + " takes " + std::to_string( arity( *kind ) ) + " inputs", line,
                  t.back() );
        auto out = b.resolve( line, t[ 2 ] );
        for ( auto net : out )
        {
            auto k = b.kind_of( net );
            if ( k == SignalKind::input || b.is_register_bit( net ) )
                fail( "gate cannot drive an input or register", line, t[ 2 ] );
        }
        auto ins = std::vector< std::vector< NetId > >{};
        for ( std::size_t i = 3; i < t.size(); ++i )
        {
            ins.push_back( b.resolve( line, t[ i ] ) );
            auto is_select = *kind == NodeKind::mux && i == 3;
            auto ok = ins.back().size() == out.size() || ( is_select && ins.back().size() == 1 );
            if ( !ok )
                fail( ErrorCode::width_mismatch, "operand width differs from output width", line, t[ i ] );
        }
        for ( std::size_t bit = 0; bit < out.size(); ++bit )
        {
            auto node = Node{};
            node.kind = *kind;
            node.output = out[ bit ];
            for ( const auto& in : ins )
                node.inputs.push_back( in.size() == 1 ? in[ 0 ] : in[ bit ] );
            b.add( std::move( node ) );
        }
        return;
    }
    if ( kw == ".const" )
    {
        need( 3 );
        if ( t.size() > 3 )
            fail( "unexpected token", line, t[ 3 ] );
        auto out = b.resolve( line, t[ 1 ] );
        auto bits = t[ 2 ].text;
        if ( bits.size() != out.size() || bits.find_first_not_of( "01" ) != std::string_view::npos )
            fail( ErrorCode::width_mismatch, "constant must be a binary string of the output width", line, t[ 2 ] );
        for ( std::size_t bit = 0; bit < out.size(); ++bit )
        {
            if ( b.kind_of( out[ bit ] ) == SignalKind::input || b.is_register_bit( out[ bit ] ) )
                fail( "constant cannot drive an input or register", line, t[ 1 ] );
            auto node = Node{};
            node.kind = NodeKind::constant;
            node.output = out[ bit ];
            node.value = tri_of( bits[ bits.size() - 1 - bit ] == '1' );
            b.add( std::move( node ) );
        }
        return;
    }
    if ( kw == ".dff" )
    {
        need( 3 );
        auto q = b.resolve( line, t[ 1 ] );
        for ( auto net : q )
        {
            if ( !b.is_register_bit( net ) )
                fail( ErrorCode::unknown_register, "DFF target must be a declared register", line, t[ 1 ] );
        }
        auto d = b.resolve( line, t[ 2 ] );
        if ( d.size() != q.size() )
            fail( ErrorCode::width_mismatch, "DFF data width differs from register width", line, t[ 2 ] );
        auto enable = no_net;
        auto reset = no_net;
        std::optional< std::uint64_t > reset_value;
        for ( std::size_t i = 3; i < t.size(); ++i )
        {
            auto opt = t[ i ].text;
            auto eq = opt.find( '=' );
            if ( eq == std::string_view::npos )
                fail( "expected key=value", line, t[ i ] );
            auto key = opt.substr( 0, eq );
            auto tok = Token{ opt.substr( eq + 1 ), t[ i ].column + static_cast< unsigned >( eq ) + 1 };
            if ( key == "en" || key == "rst" )
            {
                auto net = b.resolve( line, tok );
                if ( net.size() != 1 )
                    fail( ErrorCode::width_mismatch, std::string{ key } + " must be one bit", line, t[ i ] );
                ( key == "en" ? enable : reset ) = net[ 0 ];
            }
            else if ( key == "rstval" )
            {
                reset_value = parse_value( tok.text );
                if ( !reset_value )
                    fail( "bad reset value", line, t[ i ] );
                if ( !fits( *reset_value, static_cast< unsigned >( q.size() ) ) )
                    fail( ErrorCode::width_overflow, "reset value does not fit the register", line, t[ i ] );
            }
            else
            {
                fail( "unknown DFF option '" + std::string{ key } + "'", line, t[ i ] );
            }
        }
        if ( ( reset != no_net ) != reset_value.has_value() )
            fail( "rst and rstval must be given together", line, t[ 0 ] );
        for ( std::size_t bit = 0; bit < q.size(); ++bit )
        {
            auto node = Node{};
            node.kind = NodeKind::dff;
            node.output = q[ bit ];
            node.inputs = { d[ bit ] };
            node.value = b.init_of( q[ bit ] );
            node.enable = enable;
            node.reset = reset;
            if ( reset_value )
                node.reset_value = tri_of( bit < 64 && ( ( *reset_value >> bit ) & 1u ) );
            b.add( std::move( node ) );
        }
        return;
    }
    fail( "unknown directive '" + std::string{ kw } + "'", line, t[ 0 ] );
}

std::vector< IpNetlist > parse_modules( std::string_view text )
{
    auto modules = std::vector< IpNetlist >{};
    std::optional< NetlistBuilder > current;
    auto lines = tokenize( text );
    for ( const auto& line : lines )
    {
        auto kw = line.tokens[ 0 ].text;
        try
        {
            if ( kw == ".module" )
            {
                if ( current )
                    fail( "nested .module", line, line.tokens[ 0 ] );
                if ( line.tokens.size() != 2 || !is_identifier( line.tokens[ 1 ].text ) )
                    fail( ".module expects one name", line, line.tokens.back() );
                current.emplace( std::string{ line.tokens[ 1 ].text } );
            }
            else if ( kw == ".endmodule" )
            {
                if ( !current )
                    fail( ".endmodule without .module", line, line.tokens[ 0 ] );
                modules.push_back( current->finish() );
                current.reset();
            }
            else
            {
                if ( !current )
                    fail( "statement outside .module", line, line.tokens[ 0 ] );
                parse_module_line( *current, line );
            }
        }
        catch ( const Error& e )
        {
            if ( e.line() != 0 )
                throw;
            throw Error( e.code(), e.what(), line.number, 1 );
        }
    }
    if ( current )
        throw Error( ErrorCode::syntax_error, "missing .endmodule", lines.empty() ? 1 : lines.back().number + 1, 1 );
    return modules;
}

std::string net_ref( const IpNetlist& ip, NetId net )
{
    for ( const auto& s : ip.signals )
    {
        if ( net >= s.first && net < s.first + s.width )
            return s.width == 1 ? s.name : s.name + "[" + std::to_string( net - s.first ) + "]";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Expressions

class ExprParser
{
public:
    ExprParser( std::string_view text, unsigned line, unsigned column ) : text_( text ), line_( line ), base_( column ) {}

    Expr parse()
    {
        auto e = implication();
        skip_space();
        if ( pos_ != text_.size() )
            error( "unexpected '" + std::string{ text_.substr( pos_, 1 ) } + "'" );
        return e;
    }

private:
    [[noreturn]] void error( const std::string& message ) const
    {
        throw Error( ErrorCode::syntax_error, message, line_, base_ + static_cast< unsigned >( pos_ ) );
    }

    void skip_space()
    {
        while ( pos_ < text_.size() && std::isspace( static_cast< unsigned char >( text_[ pos_ ] ) ) )
            ++pos_;
    }

    bool accept( std::string_view op )
    {
        skip_space();
        if ( text_.substr( pos_, op.size() ) != op )
            return false;
        pos_ += op.size();
        return true;
    }

    static Expr binary( Expr::Op op, Expr a, Expr b )
    {
        auto e = Expr{};
        e.op = op;
        e.args.push_back( std::move( a ) );
        e.args.push_back( std::move( b ) );
        return e;
    }

    Expr implication()
    {
        auto lhs = disjunction();
        if ( accept( "->" ) )
            return binary( Expr::Op::implies, std::move( lhs ), implication() );
        return lhs;
    }

    Expr disjunction()
    {
        auto lhs = conjunction();
        while ( accept( "|" ) )
            lhs = binary( Expr::Op::bit_or, std::move( lhs ), conjunction() );
        return lhs;
    }

    Expr conjunction()
    {
        auto lhs = comparison();
        while ( accept( "&" ) )
            lhs = binary( Expr::Op::bit_and, std::move( lhs ), comparison() );
        return lhs;
    }

    Expr comparison()
    {
        auto lhs = unary();
        static constexpr std::pair< std::string_view, Expr::Op > ops[] = {
            { "==", Expr::Op::eq }, { "!=", Expr::Op::ne }, { "<=", Expr::Op::le },
            { ">=", Expr::Op::ge }, { "<", Expr::Op::lt },  { ">", Expr::Op::gt } };
        for ( const auto& [text, op] : ops )
        {
            if ( accept( text ) )
                return binary( op, std::move( lhs ), unary() );
        }
        return lhs;
    }

    Expr unary()
    {
        if ( accept( "~" ) )
        {
            auto e = Expr{};
            e.op = Expr::Op::bit_not;
            e.args.push_back( unary() );
            return e;
        }
        return primary();
    }

    Expr primary()
    {
        skip_space();
        if ( accept( "(" ) )
        {
            auto e = implication();
            if ( !accept( ")" ) )
                error( "expected ')'" );
            return e;
        }
        if ( pos_ >= text_.size() )
            error( "unexpected end of expression" );
        auto start = pos_;
        auto word_char = []( char c ) {
            return std::isalnum( static_cast< unsigned char >( c ) ) || c == '_' || c == '.' || c == '$';
        };
        while ( pos_ < text_.size() && word_char( text_[ pos_ ] ) )
            ++pos_;
        auto word = text_.substr( start, pos_ - start );
        if ( word.empty() )
            error( "expected a signal or literal" );
        auto e = Expr{};
        if ( std::isdigit( static_cast< unsigned char >( word.front() ) ) )
        {
            auto v = parse_value( word );
            if ( !v )
            {
                pos_ = start;
                error( "bad literal '" + std::string{ word } + "'" );
            }
            e.op = Expr::Op::literal;
            e.value = *v;
            return e;
        }
        auto dot = word.find( '.' );
        auto valid = word.front() != '.' && word.back() != '.' && word.find( "..") == std::string_view::npos &&
                     word.find( '.', dot == std::string_view::npos ? word.size() : dot + 1 ) == std::string_view::npos;
        if ( !valid )
        {
            pos_ = start;
            error( "malformed signal name '" + std::string{ word } + "'" );
        }
        e.op = Expr::Op::signal;
        e.signal = std::string{ word };
        if ( pos_ < text_.size() && text_[ pos_ ] == '[' )
        {
            ++pos_;
            auto hi = number();
            auto lo = hi;
            if ( accept( ":" ) )
                lo = number();
            if ( !accept( "]" ) )
                error( "expected ']'" );
            if ( hi < lo )
                error( "slice must be [hi:lo]" );
            e.slice = std::pair{ hi, lo };
        }
        return e;
    }

    unsigned number()
    {
        skip_space();
        auto start = pos_;
        while ( pos_ < text_.size() && std::isdigit( static_cast< unsigned char >( text_[ pos_ ] ) ) )
            ++pos_;
        auto v = parse_number( text_.substr( start, pos_ - start ), 10 );
        if ( !v || *v > 4096 )
            error( "expected a bit index" );
        return static_cast< unsigned >( *v );
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    unsigned line_;
    unsigned base_;
};

std::set< std::string > scope_of( const Expr& expr )
{
    auto scope = std::set< std::string >{};
    for ( const auto& s : referenced_signals( expr ) )
    {
        auto inst = instance_of( s );
        if ( !inst.empty() )
            scope.insert( inst );
    }
    return scope;
}

const IpNetlist& module_of( const Design& design, const Library& library, const std::string& instance )
{
    const auto* inst = design.find_instance( instance );
    if ( inst == nullptr )
        throw Error( ErrorCode::unknown_signal, "unknown instance '" + instance + "'" );
    auto it = library.find( inst->module );
    if ( it == library.end() )
        throw Error( ErrorCode::unknown_module, "unknown module '" + inst->module + "'" );
    return it->second;
}

void check_expr( const Expr& e, const Design& design, const Library& library )
{
    if ( e.op == Expr::Op::signal )
    {
        auto inst = instance_of( e.signal );
        if ( inst.empty() )
        {
            auto found = std::any_of( design.top.begin(), design.top.end(), [&]( const auto& t ) { return t.port == e.signal; } );
            if ( !found )
                throw Error( ErrorCode::unknown_signal, "unknown signal '" + e.signal + "'" );
            return;
        }
        const auto& ip = module_of( design, library, inst );
        const auto* sig = ip.find_signal( std::string_view{ e.signal }.substr( inst.size() + 1 ) );
        if ( sig == nullptr )
            throw Error( ErrorCode::unknown_signal, "unknown signal '" + e.signal + "'" );
        if ( e.slice && e.slice->first >= sig->width )
            throw Error( ErrorCode::width_mismatch, "slice out of range for '" + e.signal + "'" );
        return;
    }
    for ( const auto& a : e.args )
        check_expr( a, design, library );
}

} // namespace

// ---------------------------------------------------------------------------

const RegisterMapEntry* RegisterMap::find( std::uint32_t address ) const
{
    auto it = std::find_if( entries.begin(), entries.end(), [&]( const auto& e ) { return e.address == address; } );
    return it == entries.end() ? nullptr : &*it;
}

std::optional< std::uint32_t > RegisterMap::address_of( std::string_view reg ) const
{
    auto it = std::find_if( entries.begin(), entries.end(), [&]( const auto& e ) { return e.reg == reg; } );
    if ( it == entries.end() )
        return std::nullopt;
    return it->address;
}

std::string instance_of( std::string_view signal )
{
    auto dot = signal.find( '.' );
    if ( dot == std::string_view::npos )
        return {};
    return std::string{ signal.substr( 0, dot ) };
}

std::vector< std::string > referenced_signals( const Expr& expr )
{
    auto out = std::vector< std::string >{};
    auto walk = [&]( auto&& self, const Expr& e ) -> void {
        if ( e.op == Expr::Op::signal && std::find( out.begin(), out.end(), e.signal ) == out.end() )
            out.push_back( e.signal );
        for ( const auto& a : e.args )
            self( self, a );
    };
    walk( walk, expr );
    return out;
}

IpNetlist parse_netlist( std::string_view text )
{
    auto modules = parse_modules( text );
    if ( modules.size() != 1 )
        throw Error( ErrorCode::syntax_error, "expected exactly one .module, found " + std::to_string( modules.size() ), 1, 1 );
    return std::move( modules.front() );
}

std::vector< IpNetlist > parse_netlists( std::string_view text ) { return parse_modules( text ); }

Design parse_design( std::string_view text )
{
    auto design = Design{};
    auto seen_header = false;
    auto port_ref = [&]( const Line& line, const Token& token ) {
        auto dot = token.text.find( '.' );
        if ( dot == std::string_view::npos || !is_identifier( token.text.substr( 0, dot ) ) ||
             !is_identifier( token.text.substr( dot + 1 ) ) )
            fail( "expected instance.port", line, token );
        return PortRef{ std::string{ token.text.substr( 0, dot ) }, std::string{ token.text.substr( dot + 1 ) } };
    };
    for ( const auto& line : tokenize( text ) )
    {
        const auto& t = line.tokens;
        auto kw = t[ 0 ].text;
        auto expect = [&]( std::size_t n ) {
            if ( t.size() != n )
                fail( std::string{ kw } + " expects " + std::to_string( n - 1 ) + " operands", line, t.back() );
        };
        if ( kw == ".design" )
        {
            expect( 2 );
            if ( seen_header )
                fail( "duplicate .design", line, t[ 0 ] );
            if ( !is_identifier( t[ 1 ].text ) )
                fail( "invalid design name", line, t[ 1 ] );
            seen_header = true;
            design.name = std::string{ t[ 1 ].text };
            continue;
        }
        if ( !seen_header )
            fail( "expected .design first", line, t[ 0 ] );
        if ( kw == ".instance" )
        {
            expect( 3 );
            if ( !is_identifier( t[ 1 ].text ) || !is_identifier( t[ 2 ].text ) )
                fail( "invalid identifier", line, t[ 1 ] );
            if ( design.find_instance( t[ 2 ].text ) != nullptr )
                fail( ErrorCode::duplicate_name, "duplicate instance '" + std::string{ t[ 2 ].text } + "'", line, t[ 2 ] );
            design.instances.push_back( { std::string{ t[ 1 ].text }, std::string{ t[ 2 ].text } } );
        }
        else if ( kw == ".connect" )
        {
            expect( 3 );
            auto a = port_ref( line, t[ 1 ] );
            auto b = port_ref( line, t[ 2 ] );
            for ( const auto& [ref, tok] : { std::pair{ a, t[ 1 ] }, std::pair{ b, t[ 2 ] } } )
            {
                if ( design.find_instance( ref.instance ) == nullptr )
                    fail( ErrorCode::unknown_instance, "unknown instance '" + ref.instance + "'", line, tok );
            }
            design.connections.push_back( { std::move( a ), std::move( b ) } );
        }
        else if ( kw == ".top" )
        {
            expect( 3 );
            if ( !is_identifier( t[ 1 ].text ) )
                fail( "invalid top port name", line, t[ 1 ] );
            auto target = port_ref( line, t[ 2 ] );
            if ( design.find_instance( target.instance ) == nullptr )
                fail( ErrorCode::unknown_instance, "unknown instance '" + target.instance + "'", line, t[ 2 ] );
            design.top.push_back( { std::string{ t[ 1 ].text }, std::move( target ) } );
        }
        else
        {
            fail( "unknown directive '" + std::string{ kw } + "'", line, t[ 0 ] );
        }
    }
    if ( !seen_header )
        throw Error( ErrorCode::syntax_error, "missing .design", 1, 1 );
    return design;
}

RegisterMap parse_regmap( std::string_view text )
{
    auto map = RegisterMap{};
    for ( const auto& line : tokenize( text ) )
    {
        const auto& t = line.tokens;
        if ( t.size() != 2 )
            fail( "expected HEXADDR instance.register", line, t.back() );
        auto address = parse_hex( t[ 0 ].text );
        if ( !address )
            fail( "bad hex address", line, t[ 0 ] );
        if ( *address > 0xffffffffu )
            fail( ErrorCode::width_overflow, "address exceeds 32 bits", line, t[ 0 ] );
        auto dot = t[ 1 ].text.find( '.' );
        if ( dot == std::string_view::npos || !is_identifier( t[ 1 ].text.substr( 0, dot ) ) ||
             !is_identifier( t[ 1 ].text.substr( dot + 1 ) ) )
            fail( "expected instance.register", line, t[ 1 ] );
        if ( map.find( static_cast< std::uint32_t >( *address ) ) != nullptr )
            fail( ErrorCode::duplicate_address, "address " + hex( *address ) + " mapped twice", line, t[ 0 ] );
        if ( map.address_of( t[ 1 ].text ) )
            fail( ErrorCode::duplicate_name, "register mapped twice", line, t[ 1 ] );
        map.entries.push_back( { static_cast< std::uint32_t >( *address ), std::string{ t[ 1 ].text } } );
    }
    return map;
}

void check_regmap( const RegisterMap& map, const Design& design, const Library& library )
{
    for ( const auto& e : map.entries )
    {
        auto inst = instance_of( e.reg );
        const auto* instance = design.find_instance( inst );
        auto it = instance == nullptr ? library.end() : library.find( instance->module );
        const RegisterDecl* reg = nullptr;
        if ( it != library.end() )
            reg = it->second.find_register( std::string_view{ e.reg }.substr( inst.size() + 1 ) );
        if ( reg == nullptr )
            throw Error( ErrorCode::unknown_signal, "register map entry " + hex( e.address ) + " names unknown register " + e.reg );
        if ( !reg->software_visible )
            throw Error( ErrorCode::unknown_signal, "register " + e.reg + " is not software-visible" );
    }
}

RegisterMap parse_regmap( std::string_view text, const Design& design, const Library& library )
{
    auto map = parse_regmap( text );
    check_regmap( map, design, library );
    return map;
}

EswScript parse_esw( std::string_view text )
{
    auto script = EswScript{};
    auto lines = tokenize( text );
    for ( const auto& line : lines )
    {
        const auto& t = line.tokens;
        auto kw = t[ 0 ].text;
        auto stmt = EswStatement{};
        auto expect = [&]( std::size_t n ) {
            if ( t.size() != n )
                fail( std::string{ kw } + " expects " + std::to_string( n - 1 ) + " operands", line, t.back() );
        };
        auto word32 = [&]( const Token& tok, const char* what ) {
            auto v = parse_hex( tok.text );
            if ( !v )
                fail( std::string{ "bad hex " } + what, line, tok );
            if ( *v > 0xffffffffu )
                fail( ErrorCode::width_overflow, std::string{ what } + " exceeds the 32-bit bus", line, tok );
            return static_cast< std::uint32_t >( *v );
        };
        auto cycles = [&]( const Token& tok ) {
            auto v = parse_number( tok.text, 10 );
            if ( !v || *v == 0 || *v > 1000000 )
                fail( "expected a cycle count between 1 and 1000000", line, tok );
            return static_cast< std::uint32_t >( *v );
        };
        if ( kw == "reset" || kw == "wait" )
        {
            expect( 2 );
            stmt.op = kw == "reset" ? EswOp::reset : EswOp::wait;
            stmt.cycles = cycles( t[ 1 ] );
        }
        else if ( kw == "write" )
        {
            expect( 3 );
            stmt.op = EswOp::write;
            stmt.address = word32( t[ 1 ], "address" );
            stmt.value = word32( t[ 2 ], "value" );
        }
        else if ( kw == "read" )
        {
            expect( 2 );
            stmt.op = EswOp::read;
            stmt.address = word32( t[ 1 ], "address" );
        }
        else
        {
            fail( "unknown statement '" + std::string{ kw } + "'", line, t[ 0 ] );
        }
        if ( script.statements.empty() && stmt.op != EswOp::reset )
            fail( "script must start with reset", line, t[ 0 ] );
        script.statements.push_back( stmt );
    }
    if ( script.statements.empty() )
        throw Error( ErrorCode::syntax_error, "empty script", 1, 1 );
    return script;
}

std::vector< EswDiagnostic > dangling_addresses( const EswScript& script, const RegisterMap& map )
{
    auto out = std::vector< EswDiagnostic >{};
    for ( std::size_t i = 0; i < script.statements.size(); ++i )
    {
        const auto& s = script.statements[ i ];
        if ( s.accesses_bus() && map.find( s.address ) == nullptr )
            out.push_back( { i, s.address } );
    }
    return out;
}

Expr parse_expression( std::string_view text ) { return ExprParser{ text, 1, 1 }.parse(); }

std::vector< PropertyAst > parse_props( std::string_view text )
{
    auto props = std::vector< PropertyAst >{};
    auto number = 0u;
    auto start = std::size_t{ 0 };
    while ( start < text.size() )
    {
        auto end = text.find( '\n', start );
        if ( end == std::string_view::npos )
            end = text.size();
        auto raw = text.substr( start, end - start );
        start = end + 1;
        ++number;
        if ( auto hash = raw.find( '#' ); hash != std::string_view::npos )
            raw = raw.substr( 0, hash );
        auto first = raw.find_first_not_of( " \t\r" );
        if ( first == std::string_view::npos )
            continue;
        auto col = [&]( std::size_t at ) { return static_cast< unsigned >( at + 1 ); };
        if ( raw.substr( first, 5 ) != "prop " && raw.substr( first, 5 ) != "prop\t" )
            throw Error( ErrorCode::syntax_error, "expected 'prop NAME : EXPR'", number, col( first ) );
        auto name_start = raw.find_first_not_of( " \t", first + 4 );
        auto name_end = name_start == std::string_view::npos ? raw.size() : raw.find_first_of( " \t:", name_start );
        if ( name_start == std::string_view::npos || name_end == std::string_view::npos )
            throw Error( ErrorCode::syntax_error, "expected a property name and ':'", number, col( raw.size() ) );
        auto name = raw.substr( name_start, name_end - name_start );
        if ( !is_identifier( name ) )
            throw Error( ErrorCode::syntax_error, "invalid property name", number, col( name_start ) );
        auto colon = raw.find_first_not_of( " \t", name_end );
        if ( colon == std::string_view::npos || raw[ colon ] != ':' )
            throw Error( ErrorCode::syntax_error, "expected ':'", number, col( colon == std::string_view::npos ? raw.size() : colon ) );
        auto body = raw.substr( colon + 1 );
        while ( !body.empty() && ( body.back() == '\r' || body.back() == ' ' || body.back() == '\t' ) )
            body.remove_suffix( 1 );
        auto prop = PropertyAst{};
        prop.name = std::string{ name };
        prop.kind = PropertyKind::user;
        prop.expression = ExprParser{ body, number, col( colon + 1 ) }.parse();
        prop.scope = scope_of( prop.expression );
        if ( std::any_of( props.begin(), props.end(), [&]( const auto& p ) { return p.name == prop.name; } ) )
            throw Error( ErrorCode::duplicate_name, "property '" + prop.name + "' defined twice", number, col( name_start ) );
        props.push_back( std::move( prop ) );
    }
    return props;
}

void check_props( const std::vector< PropertyAst >& props, const Design& design, const Library& library )
{
    for ( const auto& p : props )
    {
        try
        {
            if ( p.kind == PropertyKind::xprop )
            {
                auto inst = instance_of( p.xprop_register );
                const auto& ip = module_of( design, library, inst );
                if ( ip.find_register( std::string_view{ p.xprop_register }.substr( inst.size() + 1 ) ) == nullptr )
                    throw Error( ErrorCode::unknown_signal, "unknown register '" + p.xprop_register + "'" );
            }
            else
            {
                check_expr( p.expression, design, library );
            }
        }
        catch ( const Error& e )
        {
            throw Error( e.code(), "property " + p.name + ": " + e.what() );
        }
    }
}

std::vector< PropertyAst > parse_props( std::string_view text, const Design& design, const Library& library )
{
    auto props = parse_props( text );
    check_props( props, design, library );
    return props;
}

// ---------------------------------------------------------------------------

std::string serialize( const IpNetlist& ip )
{
    auto out = std::ostringstream{};
    out << ".module " << ip.name << "\n";
    auto tri_value = []( const std::vector< Tri >& bits ) {
        auto v = std::uint64_t{ 0 };
        for ( std::size_t i = 0; i < bits.size() && i < 64; ++i )
        {
            if ( bits[ i ] == Tri::one )
                v |= std::uint64_t{ 1 } << i;
        }
        return v;
    };
    auto reg_line = [&]( const RegisterDecl& r ) {
        out << ".reg " << r.name << " " << r.width;
        if ( std::all_of( r.init.begin(), r.init.end(), []( Tri t ) { return t == Tri::x; } ) )
            out << " init=x";
        else
            out << " init=" << hex( tri_value( r.init ) );
        if ( r.software_visible )
            out << " sw";
        out << "\n";
    };
    for ( const auto& s : ip.signals )
    {
        const auto* reg = ip.find_register( s.name );
        switch ( s.kind )
        {
        case SignalKind::input: out << ".input " << s.name << " " << s.width << "\n"; break;
        case SignalKind::output:
            out << ".output " << s.name << " " << s.width << "\n";
            if ( reg != nullptr )
                reg_line( *reg );
            break;
        case SignalKind::wire: out << ".wire " << s.name << " " << s.width << "\n"; break;
        case SignalKind::reg: reg_line( *reg ); break;
        }
    }
    for ( const auto& n : ip.nodes )
    {
        switch ( n.kind )
        {
        case NodeKind::constant: out << ".const " << net_ref( ip, n.output ) << " " << tri_char( n.value ) << "\n"; break;
        case NodeKind::dff:
            out << ".dff " << net_ref( ip, n.output ) << " " << net_ref( ip, n.inputs[ 0 ] );
            if ( n.enable != no_net )
                out << " en=" << net_ref( ip, n.enable );
            if ( n.reset != no_net )
                out << " rst=" << net_ref( ip, n.reset ) << " rstval=" << tri_char( n.reset_value );
            out << "\n";
            break;
        default:
            out << ".gate " << node_kind_name( n.kind ) << " " << net_ref( ip, n.output );
            for ( auto in : n.inputs )
                out << " " << net_ref( ip, in );
            out << "\n";
        }
    }
    out << ".endmodule\n";
    return out.str();
}

std::string serialize( const Design& design )
{
    auto out = std::ostringstream{};
    out << ".design " << design.name << "\n";
    for ( const auto& i : design.instances )
        out << ".instance " << i.module << " " << i.name << "\n";
    for ( const auto& c : design.connections )
        out << ".connect " << c.a.instance << "." << c.a.port << " " << c.b.instance << "." << c.b.port << "\n";
    for ( const auto& t : design.top )
        out << ".top " << t.port << " " << t.target.instance << "." << t.target.port << "\n";
    return out.str();
}

std::string serialize( const RegisterMap& map )
{
    auto out = std::ostringstream{};
    for ( const auto& e : map.entries )
        out << hex( e.address ) << " " << e.reg << "\n";
    return out.str();
}

std::string serialize( const EswScript& script )
{
    auto out = std::ostringstream{};
    for ( const auto& s : script.statements )
    {
        switch ( s.op )
        {
        case EswOp::reset: out << "reset " << s.cycles << "\n"; break;
        case EswOp::wait: out << "wait " << s.cycles << "\n"; break;
        case EswOp::write: out << "write " << hex( s.address ) << " " << hex( s.value ) << "\n"; break;
        case EswOp::read: out << "read " << hex( s.address ) << "\n"; break;
        }
    }
    return out.str();
}

std::string serialize( const Expr& e )
{
    auto operand = [&]( const Expr& a ) {
        auto atomic = a.op == Expr::Op::signal || a.op == Expr::Op::literal || a.op == Expr::Op::bit_not;
        return atomic ? serialize( a ) : "(" + serialize( a ) + ")";
    };
    switch ( e.op )
    {
    case Expr::Op::signal:
        if ( !e.slice )
            return e.signal;
        if ( e.slice->first == e.slice->second )
            return e.signal + "[" + std::to_string( e.slice->first ) + "]";
        return e.signal + "[" + std::to_string( e.slice->first ) + ":" + std::to_string( e.slice->second ) + "]";
    case Expr::Op::literal: return hex( e.value );
    case Expr::Op::bit_not: return "~" + operand( e.args[ 0 ] );
    default: break;
    }
    auto symbol = std::string_view{};
    switch ( e.op )
    {
    case Expr::Op::bit_and: symbol = "&"; break;
    case Expr::Op::bit_or: symbol = "|"; break;
    case Expr::Op::eq: symbol = "=="; break;
    case Expr::Op::ne: symbol = "!="; break;
    case Expr::Op::lt: symbol = "<"; break;
    case Expr::Op::le: symbol = "<="; break;
    case Expr::Op::gt: symbol = ">"; break;
    case Expr::Op::ge: symbol = ">="; break;
    default: symbol = "->"; break;
    }
    return operand( e.args[ 0 ] ) + " " + std::string{ symbol } + " " + operand( e.args[ 1 ] );
}

std::string serialize( const std::vector< PropertyAst >& props )
{
    auto out = std::ostringstream{};
    for ( const auto& p : props )
    {
        if ( p.kind == PropertyKind::xprop )
            out << "# xprop " << p.name << " : known(" << p.xprop_register << ") settle=" << p.settle << "\n";
        else
            out << "prop " << p.name << " : " << serialize( p.expression ) << "\n";
    }
    return out.str();
}

std::string subsystem_name( std::size_t index ) { return std::string{ subsystem_prefix } + std::to_string( index ); }

std::map< std::string, std::vector< PropertyAst > > divide_props( const std::vector< PropertyAst >& props,
                                                                  const Design& design,
                                                                  const std::vector< std::string >& ranked )
{
    auto groups = std::map< std::string, std::vector< PropertyAst > >{};
    for ( const auto& inst : design.instances )
        groups[ inst.module ];
    for ( std::size_t s = 1; s < ranked.size(); ++s )
        groups[ subsystem_name( s ) ];

    for ( const auto& p : props )
    {
        if ( p.scope.empty() )
            throw Error( ErrorCode::unresolvable_scope, "property " + p.name + " references no instance" );
        if ( p.scope.size() == 1 )
        {
            const auto* inst = design.find_instance( *p.scope.begin() );
            if ( inst == nullptr )
                throw Error( ErrorCode::unresolvable_scope, "property " + p.name + " references unknown instance " +
                                                                *p.scope.begin() );
            groups[ inst->module ].push_back( p );
            continue;
        }
        auto covered = std::size_t{ 0 };
        auto placed = false;
        for ( std::size_t i = 0; i < ranked.size(); ++i )
        {
            covered += p.scope.count( ranked[ i ] );
            if ( covered == p.scope.size() )
            {
                groups[ subsystem_name( std::max< std::size_t >( i, 1 ) ) ].push_back( p );
                placed = true;
                break;
            }
        }
        if ( !placed )
            throw Error( ErrorCode::unresolvable_scope, "property " + p.name + " spans instances outside the design" );
    }
    return groups;
}

std::vector< PropertyAst > generate_xprops( const Design& design, const Library& library, unsigned settle )
{
    auto out = std::vector< PropertyAst >{};
    for ( const auto& inst : design.instances )
    {
        auto it = library.find( inst.module );
        if ( it == library.end() )
            throw Error( ErrorCode::unknown_module, "unknown module " + inst.module );
        for ( const auto& reg : it->second.registers )
        {
            auto p = PropertyAst{};
            p.name = "xprop_" + inst.name + "_" + reg.name;
            p.kind = PropertyKind::xprop;
            p.scope = { inst.name };
            p.xprop_register = inst.name + "." + reg.name;
            p.settle = settle;
            out.push_back( std::move( p ) );
        }
    }
    return out;
}

std::string read_file( const std::string& path )
{
    auto in = std::ifstream{ path, std::ios::binary };
    if ( !in )
        throw Error( ErrorCode::io_error, "cannot open " + path );
    auto buffer = std::ostringstream{};
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace hwv
