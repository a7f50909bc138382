#pragma once

#include "hwv/core.hpp"
#include "hwv/netlist.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hwv
{

// ---------------------------------------------------------------------------
// Register map and embedded-software script

struct RegisterMapEntry
{
    std::uint32_t address = 0;
    std::string reg; // "instance.register"

    friend bool operator==( const RegisterMapEntry&, const RegisterMapEntry& ) = default;
};

struct RegisterMap
{
    std::vector< RegisterMapEntry > entries;

    const RegisterMapEntry* find( std::uint32_t address ) const;
    std::optional< std::uint32_t > address_of( std::string_view reg ) const;

    friend bool operator==( const RegisterMap&, const RegisterMap& ) = default;
};

enum class EswOp : std::uint8_t
{
    reset,
    write,
    read,
    wait
};

struct EswStatement
{
    EswOp op = EswOp::wait;
    std::uint32_t address = 0;
    std::uint32_t value = 0;
    std::uint32_t cycles = 0;

    bool accesses_bus() const noexcept { return op == EswOp::write || op == EswOp::read; }

    friend bool operator==( const EswStatement&, const EswStatement& ) = default;
};

struct EswScript
{
    std::vector< EswStatement > statements;

    friend bool operator==( const EswScript&, const EswScript& ) = default;
};

// ---------------------------------------------------------------------------
// Properties

struct Expr
{
    enum class Op : std::uint8_t
    {
        signal,
        literal,
        bit_not,
        bit_and,
        bit_or,
        eq,
        ne,
        lt,
        le,
        gt,
        ge,
        implies
    };

    Op op = Op::literal;
    std::string signal;
    // Bit slice [hi:lo] of a signal; absent means the whole signal.
    std::optional< std::pair< unsigned, unsigned > > slice;
    std::uint64_t value = 0;
    std::vector< Expr > args;

    friend bool operator==( const Expr&, const Expr& ) = default;
};

enum class PropertyKind : std::uint8_t
{
    user,
    xprop
};

struct PropertyAst
{
    std::string name;
    PropertyKind kind = PropertyKind::user;
    std::set< std::string > scope;
    Expr expression;
    // X-propagation obligation: `reg` known from reset deassert + settle on.
    std::string xprop_register;
    unsigned settle = 4;

    friend bool operator==( const PropertyAst&, const PropertyAst& ) = default;
};

/// Instance prefix of a hierarchical signal name ("can0.MODE" -> "can0").
std::string instance_of( std::string_view signal );
/// Every signal referenced by the expression, in first-use order.
std::vector< std::string > referenced_signals( const Expr& expr );

// ---------------------------------------------------------------------------
// Parsers. Syntax errors carry a 1-based line and column.

IpNetlist parse_netlist( std::string_view text );
/// A file holding any number of `.module` blocks.
std::vector< IpNetlist > parse_netlists( std::string_view text );
Design parse_design( std::string_view text );
RegisterMap parse_regmap( std::string_view text );
/// Also resolves every entry against the elaborated design.
RegisterMap parse_regmap( std::string_view text, const Design& design, const Library& library );
EswScript parse_esw( std::string_view text );
std::vector< PropertyAst > parse_props( std::string_view text );
/// Also resolves signal references and widths against the design.
std::vector< PropertyAst > parse_props( std::string_view text, const Design& design, const Library& library );
Expr parse_expression( std::string_view text );

void check_regmap( const RegisterMap& map, const Design& design, const Library& library );
void check_props( const std::vector< PropertyAst >& props, const Design& design, const Library& library );

struct EswDiagnostic
{
    std::size_t statement = 0;
    std::uint32_t address = 0;
};

/// ESW accesses to addresses absent from the register map.
std::vector< EswDiagnostic > dangling_addresses( const EswScript& script, const RegisterMap& map );

// ---------------------------------------------------------------------------
// Serializers; parse(serialize(x)) == x.

std::string serialize( const IpNetlist& ip );
std::string serialize( const Design& design );
std::string serialize( const RegisterMap& map );
std::string serialize( const EswScript& script );
std::string serialize( const std::vector< PropertyAst >& props );
std::string serialize( const Expr& expr );

// ---------------------------------------------------------------------------
// Property grouping

inline constexpr std::string_view subsystem_prefix = "subsystem-";
std::string subsystem_name( std::size_t index );

/// Single-instance properties go to the instance's module; multi-instance
/// properties to the first build-and-prove subsystem (prefix of `ranked`
/// with at least two instances) containing their whole scope.
std::map< std::string, std::vector< PropertyAst > > divide_props( const std::vector< PropertyAst >& props,
                                                                  const Design& design,
                                                                  const std::vector< std::string >& ranked );

/// One X-propagation property per register of every instance.
std::vector< PropertyAst > generate_xprops( const Design& design, const Library& library, unsigned settle = 4 );

std::string read_file( const std::string& path );

} // namespace hwv
