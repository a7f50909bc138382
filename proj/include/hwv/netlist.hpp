#pragma once

#include "hwv/core.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hwv
{

enum class NodeKind : std::uint8_t
{
    and_gate,
    or_gate,
    xor_gate,
    not_gate,
    mux,
    constant,
    dff
};

std::string_view node_kind_name( NodeKind kind ) noexcept;
std::optional< NodeKind > node_kind_from_name( std::string_view name ) noexcept;

/// Number of data inputs. MUX inputs are ordered sel, a, b; DFF has only d
/// (enable and reset live in dedicated fields).
std::size_t arity( NodeKind kind ) noexcept;

inline constexpr std::uint32_t no_origin = std::numeric_limits< std::uint32_t >::max();
inline constexpr std::size_t no_node = std::numeric_limits< std::size_t >::max();

struct Node
{
    NodeKind kind = NodeKind::constant;
    NetId output = no_net;
    std::vector< NetId > inputs;
    // CONST: the constant bit. DFF: the power-up value (x when uninitialized).
    Tri value = Tri::x;
    NetId enable = no_net;
    NetId reset = no_net;
    Tri reset_value = Tri::x;
    // Instance index the node was inlined from (flat models only).
    std::uint32_t origin = no_origin;

    bool is_dff() const noexcept { return kind == NodeKind::dff; }

    friend bool operator==( const Node&, const Node& ) = default;
};

enum class SignalKind : std::uint8_t
{
    input,
    output,
    wire,
    reg
};

/// A named bit vector. Bit i of the signal is net `first + i` (LSB first).
struct SignalDecl
{
    std::string name;
    SignalKind kind = SignalKind::wire;
    unsigned width = 1;
    NetId first = 0;

    NetId bit( unsigned i ) const noexcept { return first + i; }
    bool is_port() const noexcept { return kind == SignalKind::input || kind == SignalKind::output; }

    friend bool operator==( const SignalDecl&, const SignalDecl& ) = default;
};

struct RegisterDecl
{
    std::string name;
    unsigned width = 1;
    std::vector< NetId > bits;
    std::vector< Tri > init;
    bool software_visible = false;

    friend bool operator==( const RegisterDecl&, const RegisterDecl& ) = default;
};

/// One IP module definition at bit level.
struct IpNetlist
{
    std::string name;
    std::vector< SignalDecl > signals;
    std::vector< Node > nodes;
    std::vector< RegisterDecl > registers;
    NetId net_count = 0;

    const SignalDecl* find_signal( std::string_view signal ) const;
    const RegisterDecl* find_register( std::string_view reg ) const;
    std::vector< const SignalDecl* > ports() const;

    friend bool operator==( const IpNetlist&, const IpNetlist& ) = default;
};

/// Checks arity, single drivers, resolved references and combinational
/// acyclicity. Throws hwv::Error.
void validate( const IpNetlist& ip );

using Library = std::map< std::string, IpNetlist, std::less<> >;

struct PortRef
{
    std::string instance;
    std::string port;

    friend bool operator==( const PortRef&, const PortRef& ) = default;
};

struct Instance
{
    std::string module;
    std::string name;

    friend bool operator==( const Instance&, const Instance& ) = default;
};

struct Connection
{
    PortRef a;
    PortRef b;

    friend bool operator==( const Connection&, const Connection& ) = default;
};

struct TopBinding
{
    std::string port;
    PortRef target;

    friend bool operator==( const TopBinding&, const TopBinding& ) = default;
};

struct Design
{
    std::string name;
    std::vector< Instance > instances;
    std::vector< Connection > connections;
    std::vector< TopBinding > top;

    const Instance* find_instance( std::string_view inst ) const;

    friend bool operator==( const Design&, const Design& ) = default;
};

/// The design restricted to `keep`: connections to dropped instances vanish,
/// so their ports become free inputs or primary outputs after elaboration.
Design subdesign( const Design& design, std::span< const std::string > keep );

struct FlatPort
{
    std::string name;
    std::vector< NetId > bits;
};

struct FlatRegister
{
    std::string name;
    std::uint32_t instance = no_origin;
    std::vector< NetId > bits;
    bool software_visible = false;
    // Bus write port synthesized for software-visible registers.
    NetId write_enable = no_net;
    std::vector< NetId > write_data;
};

struct InstancePort
{
    std::string name;
    SignalKind direction = SignalKind::input;
    std::vector< NetId > bits;
};

struct FlatInstance
{
    std::string name;
    std::string module;
    std::vector< InstancePort > ports;
    bool blackboxed = false;
};

/// Single-level elaborated netlist. Immutable once constructed; the
/// constructor checks drivers and combinational acyclicity and builds the
/// evaluation order.
class FlatModel
{
public:
    struct Parts
    {
        std::string name;
        NetId net_count = 0;
        std::vector< std::string > net_names;
        std::vector< Node > nodes;
        std::vector< FlatPort > inputs;
        std::vector< FlatPort > outputs;
        std::vector< FlatRegister > registers;
        std::vector< FlatInstance > instances;
        std::map< std::string, std::vector< NetId >, std::less<> > signals;
    };

    FlatModel() : FlatModel( Parts{} ) {}
    explicit FlatModel( Parts parts );

    const Parts& parts() const noexcept { return parts_; }
    const std::string& name() const noexcept { return parts_.name; }
    NetId net_count() const noexcept { return parts_.net_count; }
    const std::string& net_name( NetId net ) const { return parts_.net_names.at( net ); }
    const std::vector< Node >& nodes() const noexcept { return parts_.nodes; }
    const std::vector< FlatPort >& inputs() const noexcept { return parts_.inputs; }
    const std::vector< FlatPort >& outputs() const noexcept { return parts_.outputs; }
    const std::vector< FlatRegister >& registers() const noexcept { return parts_.registers; }
    const std::vector< FlatInstance >& instances() const noexcept { return parts_.instances; }

    const FlatRegister* find_register( std::string_view reg ) const;
    const FlatPort* find_input( std::string_view port ) const;
    std::optional< std::uint32_t > find_instance( std::string_view inst ) const;
    /// Bits of a hierarchical signal ("inst.sig", a top port, or a bus port).
    const std::vector< NetId >* find_signal( std::string_view signal ) const;

    std::size_t state_bits() const noexcept { return dffs_.size(); }
    std::size_t driver( NetId net ) const { return driver_.at( net ); }
    bool is_input( NetId net ) const { return input_flag_.at( net ) != 0; }
    bool is_output( NetId net ) const { return output_flag_.at( net ) != 0; }
    std::span< const std::size_t > comb_order() const noexcept { return comb_order_; }
    std::span< const std::size_t > dff_nodes() const noexcept { return dffs_; }
    std::span< const std::size_t > fanout( NetId net ) const { return fanout_.at( net ); }
    /// Primary-input nets that directly drive a DFF reset pin.
    std::span< const NetId > reset_inputs() const noexcept { return reset_inputs_; }

private:
    Parts parts_;
    std::vector< std::size_t > driver_;
    std::vector< char > input_flag_;
    std::vector< char > output_flag_;
    std::vector< std::size_t > comb_order_;
    std::vector< std::size_t > dffs_;
    std::vector< std::vector< std::size_t > > fanout_;
    std::vector< NetId > reset_inputs_;
};

/// Inlines every instance with hierarchical names. Registers keep the name
/// "instance.register"; software-visible registers get a bus write port
/// ("instance.register$we", "instance.register$wdata").
FlatModel elaborate( const Design& design, const Library& library );

/// Deduplicated module names, lexicographic.
std::vector< std::string > list_unique_ips( const Design& design );

struct InstanceScore
{
    std::string instance;
    unsigned connected_bits = 0;
};

/// Instances by descending connected port bits; ties by instance name.
std::vector< InstanceScore > rank_ips_by_connection( const Design& design, const Library& library );

struct FanoutCone
{
    /// Every node reached from the register, crossing DFF boundaries.
    std::vector< std::size_t > elements;
    /// Combinational nodes reached without crossing a DFF, topologically ordered.
    std::vector< std::size_t > first_layer;
    std::vector< NetId > sources;
};

FanoutCone fanout_cone( const FlatModel& model, std::string_view reg );

/// Removes the instance's logic and turns its output ports into free inputs.
FlatModel blackbox( const FlatModel& model, std::string_view instance );

} // namespace hwv
