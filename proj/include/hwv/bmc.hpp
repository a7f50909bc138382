#pragma once

#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"
#include "hwv/property.hpp"
#include "hwv/sim.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hwv
{

// ---------------------------------------------------------------------------
// Dual-rail X encoding

/// Binary model in which every original net n is represented by a value
/// rail value[n] and a known rail known[n]. A net is X iff its known rail is
/// 0; the value rail of an X net is unconstrained. Primary inputs stay known.
struct DualRailModel
{
    FlatModel model;
    std::vector< NetId > value;
    std::vector< NetId > known;
};

DualRailModel xprop_encode( const FlatModel& model );

// ---------------------------------------------------------------------------
// Constraints

struct Constraint
{
    enum class Kind
    {
        stopat,
        assume,
        blackbox
    };
    Kind kind = Kind::stopat;
    /// Register name for stopat/assume, instance name for blackbox.
    std::string target;
    /// Assume only; LSB first.
    std::vector< bool > value;

    friend bool operator==( const Constraint&, const Constraint& ) = default;
};

std::vector< Constraint > create_stopats( const FlatModel& model, const std::vector< std::string >& registers );
/// Every captured register must have a stopat in `stopats` (MissingStopat).
std::vector< Constraint > create_assumes( const CapturedValues& values, const std::vector< Constraint >& stopats );
std::vector< Constraint > create_blackboxes( const std::vector< std::string >& instances );

// ---------------------------------------------------------------------------
// Checking

enum class Verdict
{
    pass,
    fail,
    undetermined,
    vacuous
};

std::string_view verdict_name( Verdict v ) noexcept;

/// Counterexample: per-cycle values of the inputs and of cut registers.
struct Trace
{
    struct Signal
    {
        std::string name;
        std::vector< NetId > bits;
        /// Cut register whose value is forced during replay.
        bool forced = false;
        /// values[cycle][bit]
        std::vector< std::vector< Tri > > values;
    };
    unsigned length = 0;
    std::vector< Signal > signals;
};

std::string format_trace( const Trace& trace );

struct PropertyOutcome
{
    std::string name;
    Verdict verdict = Verdict::undetermined;
    /// PASS: cycles checked. FAIL: cycle of the violation.
    unsigned cycle = 0;
    /// UNDETERMINED: "timeout" or "bound".
    std::string reason;
    std::optional< Trace > trace;
    /// Solver time spent on the property.
    double elapsed = 0.0;
};

struct BmcOptions
{
    unsigned bound = 20;
    double budget = 3600.0;
    unsigned reset_cycles = default_reset_cycles;
    unsigned jobs = 1;
    std::uint64_t seed = 1;
    /// When non-empty, per-property DIMACS and counterexample files go here.
    std::string dump_cnf_dir;
    std::string dump_trace_dir;
    /// When non-empty, each SAT call is delegated to this DIMACS solver.
    std::string external_solver;
};

struct BmcRun
{
    const FlatModel* model = nullptr;
    std::vector< PropertyAst > properties;
    std::vector< Constraint > constraints;
    BmcOptions options;
};

struct BmcStatus
{
    bool complete = false;
    /// Sorted by property name.
    std::vector< PropertyOutcome > outcomes;
    double elapsed = 0.0;
    /// The model actually checked (after blackboxing); traces refer to it.
    std::shared_ptr< const FlatModel > checked_model;
};

/// Properties are VACUOUS when any instance in their scope is blackboxed.
/// The budget is split equally across the remaining properties; time left
/// over by properties that finish early is shared round-robin among the
/// unfinished ones. Reset inputs are held high for `reset_cycles` cycles.
BmcStatus check( const BmcRun& run );

FlatModel apply_blackboxes( const FlatModel& model, const std::vector< Constraint >& constraints );

/// Replays a counterexample on the simulator; true iff the property is
/// violated at cycle trace.length - 1.
bool replay( const FlatModel& model, const PropertyAst& property, const Trace& trace,
             unsigned reset_cycles = default_reset_cycles );

} // namespace hwv
