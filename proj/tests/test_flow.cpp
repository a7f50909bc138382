#include "hwv/flow.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace hwv;

namespace
{

std::string small( const std::string& file ) { return std::string{ HWV_CORPUS_DIR } + "/small/" + file; }

FlowInputs make_inputs( const std::string& design, const std::string& regmap, const std::string& esw,
                        const std::string& props )
{
    auto in = FlowInputs{};
    in.library.emplace( "timer", parse_netlist( read_file( small( "timer.net" ) ) ) );
    in.library.emplace( "counter", parse_netlist( read_file( small( "counter.net" ) ) ) );
    in.design = parse_design( design );
    in.regmap = parse_regmap( regmap, in.design, in.library );
    in.esw = parse_esw( esw );
    in.props = parse_props( props, in.design, in.library );
    return in;
}

FlowInputs timer_inputs( const std::string& esw )
{
    return make_inputs( ".design d\n.instance timer timer\n", read_file( small( "timer.map" ) ), esw,
                        read_file( small( "timer.prop" ) ) );
}

FlowConfig quick()
{
    auto c = FlowConfig{};
    c.ip_limit = 0.5;
    c.sub_limit = 0.5;
    return c;
}

const ReportRow& row( const VerifReport& r, const std::string& name )
{
    for ( const auto& row : r.rows )
    {
        if ( row.name == name )
            return row;
    }
    FAIL( "no row " << name );
    return r.rows.front();
}

} // namespace

TEST_CASE( "a design that formal checks fully completes in phase 2" )
{
    auto in = make_inputs( ".design d\n.instance counter counter\n", "", "reset 1\nwait 2\n",
                           read_file( small( "counter.prop" ) ) );
    auto report = run_flow( in, quick() );
    CHECK( report.result == FlowResult::formal_complete );
    CHECK( exit_code( report.result ) == 0 );
    REQUIRE( report.rows.size() == 1 );
    const auto& r = report.rows[ 0 ];
    CHECK( r.name == "counter" );
    CHECK( r.kind == "ip" );
    CHECK( r.engine == Engine::formal );
    CHECK( r.result == RowResult::finished );
    // Two user properties and one X-propagation property.
    CHECK( r.total == 3 );
    CHECK( r.resolved == 3 );
    CHECK( report.coverage == doctest::Approx( 1.0 ) );
    REQUIRE( report.evidence.size() == 1 );
    CHECK( report.evidence[ 0 ].property.name == "never3" );
    CHECK( oracle::replay_trace( *report.evidence[ 0 ].model, report.evidence[ 0 ].property, report.evidence[ 0 ].trace,
                                 report.evidence[ 0 ].reset_cycles ) );
}

TEST_CASE( "a hard datapath is resolved by constraining its enable register" )
{
    auto in = timer_inputs( "reset 2\nwrite 0x0 0x0\nwrite 0x4 0x9\nwait 2\n" );
    auto report = run_flow( in, quick() );
    CHECK( report.result == FlowResult::semiformal_complete );
    CHECK( exit_code( report.result ) == 0 );
    const auto& r = row( report, "timer" );
    CHECK( r.engine == Engine::semiformal );
    CHECK( r.result == RowResult::finished );
    CHECK( r.iterations == 1 );
    CHECK( r.undetermined == 0 );
    REQUIRE( r.history.size() == 2 );
    CHECK( r.history[ 0 ].phase == 2 );
    CHECK( r.history[ 0 ].iteration == 0 );
    CHECK( r.history[ 1 ].phase == 3 );
    CHECK( r.history[ 1 ].iteration == 1 );
    CHECK( r.history[ 1 ].constrained == std::vector< std::string >{ "timer.CTRL" } );
    CHECK( r.history[ 1 ].capture_cycle == 3 );
    REQUIRE( report.ranking.size() == 1 );
}

TEST_CASE( "formal-only mode reports an incomplete run" )
{
    auto in = timer_inputs( "reset 2\nwrite 0x0 0x0\nwait 2\n" );
    auto config = quick();
    config.formal_only = true;
    auto report = run_flow( in, config );
    CHECK( report.result == FlowResult::formal_incomplete );
    CHECK( exit_code( report.result ) == 2 );
    CHECK( row( report, "timer" ).result == RowResult::timeout );
    CHECK( report.coverage < 1.0 );
}

TEST_CASE( "an IP whose constraints never help is blackboxed or fails the flow" )
{
    // Enabling the accumulator keeps the datapath check hard.
    auto in = timer_inputs( "reset 1\nwrite 0x0 0x1\nwrite 0x4 0x1\nwait 2\n" );
    auto report = run_flow( in, quick() );
    const auto& r = row( report, "timer" );
    CHECK( r.result == RowResult::blackboxed );
    CHECK( r.iterations == 2 );
    CHECK( r.vacuous == r.total );
    for ( const auto& p : r.properties )
    {
        CHECK( p.verdict == Verdict::vacuous );
        CHECK( p.reason == "blackboxed" );
    }

    auto config = quick();
    config.blackbox_failing = false;
    report = run_flow( in, config );
    CHECK( row( report, "timer" ).result == RowResult::semiformal_fail );
    CHECK( report.result == FlowResult::semiformal_fail );
    CHECK( exit_code( report.result ) == 2 );
}

TEST_CASE( "subsystem properties are checked after the IPs" )
{
    auto in = make_inputs( ".design d\n.instance timer timer\n.instance counter counter\n",
                           read_file( small( "timer.map" ) ), "reset 2\nwrite 0x0 0x0\nwait 2\n",
                           "prop both : counter.count != 3 | timer.expired\n" );
    auto report = run_flow( in, quick() );
    const auto& sub = row( report, "subsystem-1" );
    CHECK( sub.kind == "subsystem" );
    CHECK( sub.instances.size() == 2 );
    CHECK( sub.result == RowResult::finished );
    REQUIRE( sub.properties.size() == 1 );
    CHECK( sub.properties[ 0 ].verdict == Verdict::fail );
}

TEST_CASE( "the flow stops after the requested phase" )
{
    auto in = timer_inputs( "reset 2\nwrite 0x0 0x0\nwait 2\n" );
    auto config = quick();
    config.last_phase = 1;
    auto report = run_flow( in, config );
    CHECK( report.result == FlowResult::stopped );
    CHECK( exit_code( report.result ) == 0 );
    for ( const auto& r : report.rows )
    {
        CHECK( r.result == RowResult::skipped );
        for ( const auto& p : r.properties )
        {
            CHECK( p.verdict == Verdict::undetermined );
            CHECK( p.reason == "skipped" );
        }
    }
}

TEST_CASE( "preprocessing warns about unmapped script addresses" )
{
    auto in = timer_inputs( "reset 2\nwrite 0x0 0x0\nwrite 0x80 1\nwait 2\n" );
    auto pre = phase1_preprocess( in, quick() );
    CHECK( pre.unique_ips == std::vector< std::string >{ "timer" } );
    REQUIRE( pre.poi_candidates.size() == 1 );
    CHECK( pre.poi_candidates[ 0 ].statement == 1 );
    REQUIRE( pre.warnings.size() == 1 );
    CHECK( pre.warnings[ 0 ].find( "0x80" ) != std::string::npos );
    CHECK( pre.groups.at( "timer" ).size() == 4 );
}

TEST_CASE( "a design without registers has no obligations" )
{
    auto in = FlowInputs{};
    in.library.emplace( "inv", parse_netlist( ".module inv\n.input a 1\n.output y 1\n.gate NOT y a\n.endmodule\n" ) );
    in.design = parse_design( ".design d\n.instance inv i\n" );
    in.esw = parse_esw( "reset 1\n" );
    auto report = run_flow( in, quick() );
    CHECK( report.no_obligations );
    CHECK( report.total == 0 );
    CHECK( report.coverage == doctest::Approx( 1.0 ) );
    CHECK( report.result == FlowResult::formal_complete );
}

TEST_CASE( "properties can be moved to another instance of the same module" )
{
    auto p = parse_props( "prop p : a0.x == a0.y[1:0] -> a10.z\n" )[ 0 ];
    auto q = rename_instance( p, "a0", "b" );
    CHECK( q.scope == std::set< std::string >{ "a10", "b" } );
    CHECK( serialize( std::vector{ q } ) == "prop p : (b.x == b.y[1:0]) -> a10.z\n" );
    auto x = generate_xprops( parse_design( ".design d\n.instance counter c0\n" ),
                              Library{ { "counter", parse_netlist( read_file( small( "counter.net" ) ) ) } } )[ 0 ];
    auto y = rename_instance( x, "c0", "c1" );
    CHECK( y.xprop_register == "c1.count" );
    CHECK( y.scope == std::set< std::string >{ "c1" } );
}

TEST_CASE( "reports render as text and JSON" )
{
    auto in = make_inputs( ".design d\n.instance counter counter\n", "", "reset 1\nwait 2\n",
                           read_file( small( "counter.prop" ) ) );
    auto report = run_flow( in, quick() );
    auto text = report_text( report );
    CHECK( text.find( "counter" ) != std::string::npos );
    CHECK( text.find( "FORMAL_COMPLETE" ) != std::string::npos );

    auto json = nlohmann::json::parse( report_json( report ) );
    CHECK( json[ "result" ] == "FORMAL_COMPLETE" );
    CHECK( json[ "rows" ].size() == 1 );
    CHECK_FALSE( json[ "rows" ][ 0 ].contains( "elapsed" ) );
    CHECK( report_json( report ) == report_json( run_flow( in, quick() ) ) );
    auto timed = nlohmann::json::parse( report_json( report, { true } ) );
    CHECK( timed[ "rows" ][ 0 ].contains( "elapsed" ) );
}
