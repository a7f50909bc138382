#pragma once

#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace hwv
{

// ---------------------------------------------------------------------------
// Cycle primitives shared by the simulator, trace replay and test oracles.

/// All nets X except register bits, which take their power-up value.
std::vector< Tri > initial_values( const FlatModel& model );

/// Recomputes every combinational net from the inputs and register bits.
void evaluate( const FlatModel& model, std::vector< Tri >& values );

/// Clock edge: register bits take their next-state value computed from the
/// current (evaluated) net values. q' = rst ? rstval : ( en ? d : q ).
void clock( const FlatModel& model, std::vector< Tri >& values );

/// Renders bits MSB first with 'x' for unknown bits.
std::string bits_string( const std::vector< Tri >& values, const std::vector< NetId >& bits );

// ---------------------------------------------------------------------------
// Script-driven simulation

struct SimState
{
    std::uint64_t cycle = 0;
    /// Register bits hold the state at `cycle`; other nets hold the values of
    /// the last evaluated cycle.
    std::vector< Tri > values;
    std::size_t pc = 0;
    /// Cycles still to run for the statement at `pc` (0: not started).
    std::uint32_t remaining = 0;
    std::mt19937_64 rng;
};

struct Poi
{
    std::size_t statement = 0;
    std::uint32_t address = 0;
    std::string reg;

    friend bool operator==( const Poi&, const Poi& ) = default;
};

using PoiSet = std::vector< Poi >;

/// Every statement whose address maps to a ranked register.
PoiSet set_pois( const RegisterMap& map, const std::vector< std::string >& ranked, const EswScript& script );

struct SimDiagnostic
{
    std::uint64_t cycle = 0;
    std::size_t statement = 0;
    std::uint32_t address = 0;
    std::string message;
};

struct SimEvent
{
    enum class Kind
    {
        triggered,
        script_ended
    };
    Kind kind = Kind::script_ended;
    Poi poi;
};

struct CapturedValues
{
    std::uint64_t cycle = 0;
    /// Fully known registers only; bits LSB first.
    std::map< std::string, std::vector< bool > > values;
};

class Simulator
{
public:
    /// Inputs that are neither bus ports nor reset inputs are drawn from a
    /// generator seeded with `seed`.
    Simulator( const FlatModel& model, const RegisterMap& map, std::uint64_t seed );

    SimState start() const;

    /// Runs script statements (one bus transaction per cycle, `reset N` and
    /// `wait N` take N cycles) until a PoI statement has completed or the
    /// script ends.
    SimEvent run_until_poi( const EswScript& script, const PoiSet& pois, SimState& state );

    /// Writes "cycle signal value" lines for every change of a port or
    /// register. Pass nullptr to disable.
    void set_dump( std::ostream* out ) { dump_ = out; }

    const std::vector< SimDiagnostic >& diagnostics() const noexcept { return diagnostics_; }
    const FlatModel& model() const noexcept { return model_; }

private:
    void step( const EswStatement& stmt, std::size_t index, SimState& state );
    void write_dump( const SimState& state );

    const FlatModel& model_;
    const RegisterMap& map_;
    std::uint64_t seed_;
    std::vector< NetId > random_inputs_;
    std::vector< char > is_reset_;
    std::vector< char > is_bus_;
    std::ostream* dump_ = nullptr;
    std::map< std::string, std::string > last_dump_;
    std::vector< SimDiagnostic > diagnostics_;
};

CapturedValues collect_sim_values( const FlatModel& model, const SimState& state, const std::vector< std::string >& registers );

} // namespace hwv
