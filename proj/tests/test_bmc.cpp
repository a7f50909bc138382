#include "hwv/bmc.hpp"

#include "support/oracles.hpp"
#include "support/random_models.hpp"

#include <doctest.h>

#include <random>

using namespace hwv;

namespace
{

std::string small( const std::string& file ) { return std::string{ HWV_CORPUS_DIR } + "/small/" + file; }

const PropertyOutcome& outcome( const BmcStatus& s, const std::string& name )
{
    for ( const auto& o : s.outcomes )
    {
        if ( o.name == name )
            return o;
    }
    FAIL( "no outcome for " << name );
    return s.outcomes.front();
}

gen::RandomCase counter()
{
    auto c = gen::wrap( read_file( small( "counter.net" ) ), "counter" );
    c.props = parse_props( read_file( small( "counter.prop" ) ), c.design, c.library );
    return c;
}

gen::RandomCase timer()
{
    auto c = gen::wrap( read_file( small( "timer.net" ) ), "timer" );
    c.props = parse_props( read_file( small( "timer.prop" ) ), c.design, c.library );
    return c;
}

} // namespace

TEST_CASE( "counter reaches 3 in cycle 3 and never exceeds 3" )
{
    auto c = counter();
    auto run = BmcRun{ &c.model, c.props, {}, {} };
    run.options.bound = 6;
    auto status = check( run );
    CHECK( status.complete );
    REQUIRE( status.outcomes.size() == 2 );
    CHECK( status.outcomes[ 0 ].name == "below4" );

    const auto& below = outcome( status, "below4" );
    CHECK( below.verdict == Verdict::pass );
    CHECK( below.cycle == 6 );

    const auto& never = outcome( status, "never3" );
    REQUIRE( never.verdict == Verdict::fail );
    CHECK( never.cycle == 3 );
    REQUIRE( never.trace );
    CHECK( never.trace->length == 4 );
    CHECK( replay( *status.checked_model, c.props[ 0 ], *never.trace ) );
    CHECK( oracle::replay_trace( *status.checked_model, c.props[ 0 ], *never.trace ) );
    CHECK( format_trace( *never.trace ) == "# cycles 4\n" );

    run.options.bound = 3;
    CHECK( outcome( check( run ), "never3" ).verdict == Verdict::pass );
}

TEST_CASE( "a pinned enable makes the datapath property easy" )
{
    auto t = timer();
    auto stopats = create_stopats( t.model, { "timer.CTRL" } );
    REQUIRE( stopats.size() == 1 );
    CHECK( stopats[ 0 ].kind == Constraint::Kind::stopat );

    auto captured = CapturedValues{ 3, { { "timer.CTRL", std::vector< bool >( 8, false ) } } };
    auto assumes = create_assumes( captured, stopats );
    REQUIRE( assumes.size() == 1 );
    CHECK( assumes[ 0 ].value == std::vector< bool >( 8, false ) );

    auto constraints = stopats;
    constraints.insert( constraints.end(), assumes.begin(), assumes.end() );
    auto run = BmcRun{ &t.model, t.props, constraints, {} };
    run.options.bound = 20;
    run.options.budget = 60;
    auto status = check( run );
    CHECK( status.complete );
    CHECK( outcome( status, "timer_dp" ).verdict == Verdict::pass );

    // The accumulator cannot load before cycle 3.
    auto early = BmcRun{ &t.model, t.props, {}, {} };
    early.options.bound = 3;
    CHECK( outcome( check( early ), "timer_dp" ).verdict == Verdict::pass );
}

TEST_CASE( "unconstrained multiplier commutativity times out on a small budget" )
{
    auto t = timer();
    auto run = BmcRun{ &t.model, t.props, {}, {} };
    run.options.bound = 20;
    run.options.budget = 0.3;
    auto status = check( run );
    CHECK_FALSE( status.complete );
    const auto& o = outcome( status, "timer_dp" );
    CHECK( o.verdict == Verdict::undetermined );
    CHECK( o.reason == "timeout" );
    CHECK( status.elapsed < 5.0 );
}

TEST_CASE( "assume without stopat is rejected" )
{
    auto t = timer();
    auto captured = CapturedValues{ 3, { { "timer.PERIOD", std::vector< bool >( 8, false ) } } };
    auto stopats = create_stopats( t.model, { "timer.CTRL" } );
    CHECK_THROWS_AS( create_assumes( captured, stopats ), Error );
    try
    {
        create_assumes( captured, stopats );
    }
    catch ( const Error& e )
    {
        CHECK( e.code() == ErrorCode::missing_stopat );
    }
    auto bad = BmcRun{ &t.model, t.props, { Constraint{ Constraint::Kind::assume, "timer.CTRL", std::vector< bool >( 8 ) } }, {} };
    CHECK_THROWS_AS( check( bad ), Error );
}

TEST_CASE( "blackboxed scope makes properties vacuous" )
{
    auto t = timer();
    auto run = BmcRun{ &t.model, t.props, create_blackboxes( { "timer" } ), {} };
    auto status = check( run );
    CHECK( outcome( status, "timer_dp" ).verdict == Verdict::vacuous );
    CHECK( status.checked_model->instances()[ 0 ].blackboxed );
}

TEST_CASE( "X-propagation properties before their first cycle are undetermined at the bound" )
{
    auto c = gen::wrap( ".module u\n.input rst 1\n.reg r 1\n.dff r r\n.endmodule\n" );
    c.props = generate_xprops( c.design, c.library, 4 );
    auto run = BmcRun{ &c.model, c.props, {}, {} };
    run.options.bound = 3;
    auto o = check( run ).outcomes.at( 0 );
    CHECK( o.verdict == Verdict::undetermined );
    CHECK( o.reason == "bound" );
    run.options.bound = 8;
    o = check( run ).outcomes.at( 0 );
    CHECK( o.verdict == Verdict::fail );
    CHECK( o.cycle == 5 );
}

TEST_CASE( "dual-rail encoding agrees with 3-valued simulation on random models" )
{
    auto rng = std::mt19937_64{ 99 };
    for ( int i = 0; i < 40; ++i )
    {
        auto c = gen::random_case( rng );
        CHECK( oracle::dual_rail_mismatches( c.model, rng, 12 ) == 0 );
    }
}

TEST_CASE( "BMC agrees with explicit-state search on random models" )
{
    auto rng = std::mt19937_64{ 31337 };
    for ( int i = 0; i < 30; ++i )
    {
        auto c = gen::random_case( rng );
        auto bound = 2 + static_cast< unsigned >( rng() % 6 );
        auto run = BmcRun{ &c.model, c.props, {}, {} };
        run.options.bound = bound;
        auto status = check( run );
        auto expected = oracle::explicit_check( c.model, c.props, bound );
        for ( std::size_t k = 0; k < c.props.size(); ++k )
        {
            CAPTURE( c.netlist );
            CAPTURE( c.props[ k ].name );
            const auto& o = outcome( status, c.props[ k ].name );
            if ( o.verdict == Verdict::undetermined && o.reason == "bound" )
            {
                CHECK_FALSE( expected[ k ].fails );
                continue;
            }
            REQUIRE( o.verdict != Verdict::undetermined );
            CHECK( ( o.verdict == Verdict::fail ) == expected[ k ].fails );
            if ( o.verdict == Verdict::fail && expected[ k ].fails )
            {
                CHECK( o.cycle == expected[ k ].cycle );
                CHECK( oracle::replay_trace( *status.checked_model, c.props[ k ], *o.trace ) );
            }
        }
    }
}
