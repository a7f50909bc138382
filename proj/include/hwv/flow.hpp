#pragma once

#include "hwv/bmc.hpp"
#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"
#include "hwv/sim.hpp"
#include "hwv/sra.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hwv
{

struct FlowConfig
{
    double ip_limit = 3600.0;
    double sub_limit = 5400.0;
    bool blackbox_failing = true;
    unsigned bound = 20;
    SraWeights weights;
    bool multiplicity = false;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    unsigned settle = 4;
    unsigned reset_cycles = default_reset_cycles;
    /// Phases 2 and 4 only.
    bool formal_only = false;
    /// Stop after this phase (1..5).
    unsigned last_phase = 5;
    std::string dump_cnf_dir;
    std::string dump_trace_dir;
    std::string external_solver;
};

struct FlowInputs
{
    Design design;
    Library library;
    RegisterMap regmap;
    EswScript esw;
    std::vector< PropertyAst > props;
};

/// Parses a design and the modules of every *.net file in `netlist_dir`
/// (default: the design file's directory), then checks that it elaborates.
std::pair< Design, Library > load_design( const std::string& design_path, const std::string& netlist_dir );

/// Loads and cross-validates every input file. `netlist_dir` holds one or
/// more *.net files; when empty, the design file's directory is used.
FlowInputs load_inputs( const std::string& design_path, const std::string& netlist_dir, const std::string& regmap_path,
                        const std::string& esw_path, const std::string& props_path );

struct Preprocessed
{
    std::vector< std::string > unique_ips;
    std::vector< InstanceScore > ranked;
    RegisterMap regmap;
    /// Every ESW statement that accesses a mapped register.
    PoiSet poi_candidates;
    /// User and generated X-propagation properties by architecture.
    std::map< std::string, std::vector< PropertyAst > > groups;
    std::vector< std::string > warnings;
};

Preprocessed phase1_preprocess( const FlowInputs& inputs, const FlowConfig& config );

enum class Engine
{
    formal,
    semiformal
};

enum class RowResult
{
    finished,
    timeout,
    blackboxed,
    semiformal_fail,
    skipped
};

enum class FlowResult
{
    formal_complete,
    semiformal_complete,
    semiformal_fail,
    formal_incomplete,
    stopped
};

std::string_view engine_name( Engine e ) noexcept;
std::string_view row_result_name( RowResult r ) noexcept;
std::string_view flow_result_name( FlowResult r ) noexcept;

struct IterationRecord
{
    /// Flow phase of the check (2 and 4 formal, 3 and 5 semiformal).
    unsigned phase = 0;
    /// 1-based semiformal iteration; 0 for a formal attempt.
    unsigned iteration = 0;
    std::vector< std::string > constrained;
    std::size_t resolved = 0;
    std::size_t undetermined = 0;
    std::size_t vacuous = 0;
    /// Simulation cycle at which constraint values were captured.
    std::uint64_t capture_cycle = 0;
    double elapsed = 0.0;
};

struct PropertyResult
{
    std::string name;
    Verdict verdict = Verdict::undetermined;
    unsigned cycle = 0;
    std::string reason;
};

struct ReportRow
{
    std::string name;
    /// "ip" or "subsystem".
    std::string kind;
    std::vector< std::string > instances;
    Engine engine = Engine::formal;
    RowResult result = RowResult::skipped;
    double elapsed = 0.0;
    unsigned iterations = 0;
    std::size_t resolved = 0;
    std::size_t undetermined = 0;
    std::size_t vacuous = 0;
    std::size_t total = 0;
    std::vector< PropertyResult > properties;
    std::vector< IterationRecord > history;
};

/// A counterexample kept for independent replay.
struct FailureEvidence
{
    std::string architecture;
    PropertyAst property;
    std::shared_ptr< const FlatModel > model;
    Trace trace;
    unsigned reset_cycles = default_reset_cycles;
};

struct VerifReport
{
    FlowResult result = FlowResult::stopped;
    std::vector< ReportRow > rows;
    std::size_t total = 0;
    std::size_t resolved = 0;
    std::size_t undetermined = 0;
    std::size_t vacuous = 0;
    double coverage = 1.0;
    bool no_obligations = false;
    std::vector< std::string > warnings;
    std::vector< InstanceScore > ranking;
    FlowConfig config;
    std::vector< FailureEvidence > evidence;
};

/// Runs the five-phase flow (or its formal-only subset) and returns the
/// report; input errors surface as hwv::Error.
VerifReport run_flow( const FlowInputs& inputs, const FlowConfig& config );

/// Rewrites every reference to instance `from` into instance `to`.
PropertyAst rename_instance( const PropertyAst& prop, const std::string& from, const std::string& to );

struct ReportOptions
{
    /// Include wall-clock figures in JSON (they make reports non-reproducible).
    bool timing = false;
};

std::string report_text( const VerifReport& report );
std::string report_json( const VerifReport& report, const ReportOptions& options = {} );

/// 0 on complete (or requested early stop), 2 on semiformal failure or an
/// incomplete formal-only run.
int exit_code( FlowResult result ) noexcept;

} // namespace hwv
