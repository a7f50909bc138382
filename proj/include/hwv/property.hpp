#pragma once

#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"

#include <string>
#include <vector>

namespace hwv
{

/// A property compiled into monitor logic.
///
/// A user property is violated in a cycle where its monitor net is a known 0.
/// An X-propagation property is violated in a cycle >= first_cycle where any
/// watched bit is X.
struct Monitor
{
    std::string name;
    PropertyKind kind = PropertyKind::user;
    NetId net = no_net;
    std::vector< NetId > watched;
    unsigned first_cycle = 0;
};

struct MonitoredModel
{
    FlatModel model;
    std::vector< Monitor > monitors;
};

/// Cycles during which reset inputs are held high at the start of every run.
inline constexpr unsigned default_reset_cycles = 1;

/// Adds one monitor per property to a copy of `model`. Signals resolve as
/// hierarchical names ("inst.sig", optionally sliced) or top-level ports.
/// Unsized literals take the width of the other operand; sized operands of
/// different widths are zero-extended. The whole expression must be 1 bit.
MonitoredModel compile_properties( const FlatModel& model, const std::vector< PropertyAst >& props,
                                   unsigned reset_cycles = default_reset_cycles );

bool violated( const Monitor& monitor, const std::vector< Tri >& values, unsigned cycle );

} // namespace hwv
