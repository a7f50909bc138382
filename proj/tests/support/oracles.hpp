#pragma once

// Reference implementations used only by tests. They favour obviousness over
// speed and share no code with the engines they check beyond the 3-valued
// cycle primitives of the simulator.

#include "hwv/bmc.hpp"
#include "hwv/sat.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace oracle
{

struct ExplicitResult
{
    std::string name;
    bool fails = false;
    /// Earliest violating cycle when `fails`.
    unsigned cycle = 0;
};

/// Explicit-state reachability over all input sequences. Reset inputs are
/// high for the first `reset_cycles` cycles and low afterwards; every other
/// input bit takes both values in every cycle.
std::vector< ExplicitResult > explicit_check( const hwv::FlatModel& model, const std::vector< hwv::PropertyAst >& props,
                                              unsigned bound, unsigned reset_cycles = hwv::default_reset_cycles );

/// Number of simple paths from the register's bits to a primary output or to
/// a DFF of another register, enumerated one by one.
std::uint64_t enumerate_paths( const hwv::FlatModel& model, std::string_view reg );

/// Pessimistic 3-valued value of a property expression; bits LSB first.
std::vector< hwv::Tri > eval_expr( const hwv::Expr& expr, const hwv::FlatModel& model,
                                   const std::vector< hwv::Tri >& values );

/// True iff the property is violated in the given cycle of a simulation
/// whose net values are `values`.
bool violated_now( const hwv::PropertyAst& prop, const hwv::FlatModel& model, const std::vector< hwv::Tri >& values,
                   unsigned cycle, unsigned reset_cycles );

/// Drives the trace into the simulator and evaluates the property directly.
/// True iff it is violated at cycle trace.length - 1 and not before.
bool replay_trace( const hwv::FlatModel& model, const hwv::PropertyAst& prop, const hwv::Trace& trace,
                   unsigned reset_cycles = hwv::default_reset_cycles );

/// Simulates the dual-rail encoding in two-valued logic next to the 3-valued
/// simulator under `stimuli` random input sequences of `cycles` cycles and
/// returns the number of (cycle, net) pairs where the two disagree: a known
/// rail of 1 must match a known simulator value, a known rail of 0 an X.
std::size_t dual_rail_mismatches( const hwv::FlatModel& model, std::mt19937_64& rng, unsigned cycles,
                                  unsigned stimuli = 1, unsigned reset_cycles = hwv::default_reset_cycles );

/// Truth-table satisfiability; only for small variable counts.
bool truth_table_sat( const hwv::Cnf& cnf );

} // namespace oracle
