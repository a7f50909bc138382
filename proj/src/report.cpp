#include "hwv/flow.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace hwv
{

namespace
{

std::string fixed( double v, int digits )
{
    char buf[ 64 ];
    std::snprintf( buf, sizeof buf, "%.*f", digits, v );
    return buf;
}

std::string pad( std::string s, std::size_t width )
{
    if ( s.size() < width )
        s.append( width - s.size(), ' ' );
    return s;
}

std::string join( const std::vector< std::string >& items, const char* sep )
{
    auto out = std::string{};
    for ( const auto& i : items )
    {
        if ( !out.empty() )
            out += sep;
        out += i;
    }
    return out;
}

nlohmann::ordered_json config_json( const FlowConfig& c )
{
    auto j = nlohmann::ordered_json{};
    j[ "ip_limit" ] = c.ip_limit;
    j[ "sub_limit" ] = c.sub_limit;
    j[ "bound" ] = c.bound;
    j[ "blackbox_failing" ] = c.blackbox_failing;
    j[ "seed" ] = c.seed;
    j[ "jobs" ] = c.jobs;
    j[ "settle" ] = c.settle;
    j[ "reset_cycles" ] = c.reset_cycles;
    j[ "path_weight" ] = c.weights.path;
    j[ "element_weight" ] = c.weights.element;
    j[ "multiplicity" ] = c.multiplicity;
    j[ "formal_only" ] = c.formal_only;
    j[ "last_phase" ] = c.last_phase;
    return j;
}

} // namespace

std::string report_text( const VerifReport& r )
{
    auto out = std::ostringstream{};
    out << pad( "Architecture", 14 ) << pad( "Engine", 12 ) << pad( "Result", 16 ) << pad( "Time", 11 )
        << pad( "Iter", 6 ) << pad( "Resolved", 10 ) << pad( "Undet", 7 ) << "Vacuous\n";
    for ( const auto& row : r.rows )
    {
        auto time = row.result == RowResult::skipped ? std::string{ "-" } : fixed( row.elapsed, 2 ) + "s";
        out << pad( row.name, 14 ) << pad( std::string{ engine_name( row.engine ) }, 12 )
            << pad( std::string{ row_result_name( row.result ) }, 16 ) << pad( time, 11 )
            << pad( std::to_string( row.iterations ), 6 ) << pad( std::to_string( row.resolved ), 10 )
            << pad( std::to_string( row.undetermined ), 7 ) << row.vacuous << "\n";
    }
    out << "\n";
    for ( const auto& row : r.rows )
    {
        if ( row.properties.empty() )
            continue;
        out << row.name << " [" << join( row.instances, ", " ) << "]\n";
        for ( const auto& h : row.history )
        {
            out << "  phase " << h.phase;
            if ( h.iteration == 0 )
                out << " formal: ";
            else
                out << " iteration " << h.iteration << ": ";
            if ( h.constrained.empty() )
                out << "no constraints";
            else
                out << "pinned " << join( h.constrained, ", " ) << " at cycle " << h.capture_cycle;
            out << "; " << h.resolved << " resolved, " << h.undetermined << " undetermined, " << h.vacuous
                << " vacuous\n";
        }
        for ( const auto& p : row.properties )
        {
            out << "  " << pad( p.name, 28 ) << verdict_name( p.verdict );
            if ( p.verdict == Verdict::fail )
                out << " at cycle " << p.cycle;
            else if ( p.verdict == Verdict::pass )
                out << " (" << p.cycle << " cycles)";
            if ( !p.reason.empty() )
                out << " (" << p.reason << ")";
            out << "\n";
        }
    }
    for ( const auto& w : r.warnings )
        out << "warning: " << w << "\n";
    out << "coverage: " << fixed( r.coverage, 4 ) << " (" << r.resolved << "/" << r.total << " resolved, "
        << r.undetermined << " undetermined, " << r.vacuous << " vacuous)";
    if ( r.no_obligations )
        out << " no obligations";
    out << "\nresult: " << flow_result_name( r.result ) << "\n";
    return out.str();
}

std::string report_json( const VerifReport& r, const ReportOptions& options )
{
    auto j = nlohmann::ordered_json{};
    j[ "result" ] = flow_result_name( r.result );
    j[ "coverage" ] = r.coverage;
    j[ "no_obligations" ] = r.no_obligations;
    j[ "totals" ] = { { "properties", r.total },
                      { "resolved", r.resolved },
                      { "undetermined", r.undetermined },
                      { "vacuous", r.vacuous } };
    j[ "config" ] = config_json( r.config );

    auto ranking = nlohmann::ordered_json::array();
    for ( const auto& s : r.ranking )
        ranking.push_back( { { "instance", s.instance }, { "connected_bits", s.connected_bits } } );
    j[ "ranking" ] = ranking;

    auto rows = nlohmann::ordered_json::array();
    for ( const auto& row : r.rows )
    {
        auto o = nlohmann::ordered_json{};
        o[ "name" ] = row.name;
        o[ "kind" ] = row.kind;
        o[ "instances" ] = row.instances;
        o[ "engine" ] = engine_name( row.engine );
        o[ "result" ] = row_result_name( row.result );
        if ( options.timing )
            o[ "elapsed" ] = row.elapsed;
        o[ "iterations" ] = row.iterations;
        o[ "resolved" ] = row.resolved;
        o[ "undetermined" ] = row.undetermined;
        o[ "vacuous" ] = row.vacuous;
        o[ "total" ] = row.total;
        auto props = nlohmann::ordered_json::array();
        for ( const auto& p : row.properties )
        {
            auto po = nlohmann::ordered_json{};
            po[ "name" ] = p.name;
            po[ "verdict" ] = verdict_name( p.verdict );
            po[ "cycle" ] = p.cycle;
            if ( !p.reason.empty() )
                po[ "reason" ] = p.reason;
            props.push_back( po );
        }
        o[ "properties" ] = props;
        auto history = nlohmann::ordered_json::array();
        for ( const auto& h : row.history )
        {
            auto ho = nlohmann::ordered_json{};
            ho[ "phase" ] = h.phase;
            ho[ "iteration" ] = h.iteration;
            ho[ "constrained" ] = h.constrained;
            ho[ "capture_cycle" ] = h.capture_cycle;
            ho[ "resolved" ] = h.resolved;
            ho[ "undetermined" ] = h.undetermined;
            ho[ "vacuous" ] = h.vacuous;
            if ( options.timing )
                ho[ "elapsed" ] = h.elapsed;
            history.push_back( ho );
        }
        o[ "history" ] = history;
        rows.push_back( o );
    }
    j[ "rows" ] = rows;
    j[ "warnings" ] = r.warnings;
    return j.dump( 2 ) + "\n";
}

} // namespace hwv
