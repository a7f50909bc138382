// Acceptance run: one pass/fail line per criterion, nonzero exit on any failure.

#include "hwv/flow.hpp"

#include "support/oracles.hpp"
#include "support/random_models.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace hwv;
namespace fs = std::filesystem;

namespace
{

using Seconds = std::chrono::duration< double >;

const std::string corpus = HWV_CORPUS_DIR;

std::string small( const std::string& file ) { return corpus + "/small/" + file; }

double since( Clock::time_point start ) { return Seconds( Clock::now() - start ).count(); }

int failures = 0;
// Result lines by criterion number, printed in order at the end.
std::map< int, std::string > lines;

void report( int n, bool ok, const std::string& title, const std::string& detail )
{
    lines[ n ] = std::string{ ok ? "PASS" : "FAIL" } + "  criterion " + std::to_string( n ) + ": " + title + " (" +
                 detail + ")";
    std::cerr << "criterion " << n << " checked" << std::endl;
    if ( !ok )
        ++failures;
}

// Reasons a criterion failed, collected while checking it.
struct Problems
{
    std::vector< std::string > list;

    void add( const std::string& p ) { list.push_back( p ); }
    bool empty() const { return list.empty(); }
    std::string text() const
    {
        auto out = std::string{};
        for ( std::size_t i = 0; i < list.size() && i < 5; ++i )
            out += ( i ? "; " : "" ) + list[ i ];
        if ( list.size() > 5 )
            out += "; +" + std::to_string( list.size() - 5 ) + " more";
        return out;
    }
};

// Every FAIL trace produced during the run, replayed under criterion 5.
struct Replay
{
    std::shared_ptr< const FlatModel > model;
    PropertyAst property;
    Trace trace;
    unsigned cycle = 0;
    unsigned reset_cycles = default_reset_cycles;
    std::string origin;
};

std::vector< Replay > traces;

void keep_traces( const BmcStatus& status, const std::vector< PropertyAst >& props, const std::string& origin,
                  unsigned reset_cycles = default_reset_cycles )
{
    for ( const auto& o : status.outcomes )
    {
        if ( o.verdict != Verdict::fail )
            continue;
        for ( const auto& p : props )
        {
            if ( p.name == o.name )
                traces.push_back( { status.checked_model, p, *o.trace, o.cycle, reset_cycles, origin } );
        }
    }
}

const ReportRow* find_row( const VerifReport& r, const std::string& name )
{
    for ( const auto& row : r.rows )
    {
        if ( row.name == name )
            return &row;
    }
    return nullptr;
}

std::size_t finished_rows( const VerifReport& r, const std::string& kind )
{
    auto n = std::size_t{ 0 };
    for ( const auto& row : r.rows )
        n += row.kind == kind && row.result == RowResult::finished ? 1 : 0;
    return n;
}

int run_cli( const std::string& args )
{
    auto cmd = std::string{ HWV_CLI_PATH } + " " + args + " > /dev/null 2>&1";
    auto st = std::system( cmd.c_str() );
    return WIFEXITED( st ) ? WEXITSTATUS( st ) : -1;
}

std::string slurp( const fs::path& p )
{
    auto in = std::ifstream( p, std::ios::binary );
    return { std::istreambuf_iterator< char >( in ), {} };
}

FlowConfig corpus_config()
{
    auto c = FlowConfig{};
    c.ip_limit = 5;
    c.sub_limit = 8;
    c.seed = 1;
    return c;
}

FlowInputs corpus_inputs()
{
    return load_inputs( corpus + "/gateway.dsn", "", corpus + "/gateway.map", corpus + "/boot.esw", corpus + "/user.prop" );
}

// ---------------------------------------------------------------------------

void criterion1()
{
    auto c = gen::wrap( read_file( small( "tworeg.net" ) ), "tworeg" );
    auto map = parse_regmap( read_file( small( "tworeg.map" ) ), c.design, c.library );
    auto start = Clock::now();
    auto ranked = do_sra( c.model, map );
    auto ms = since( start ) * 1e3;
    auto ok = ranked.size() == 2 && ranked[ 0 ].reg == "tworeg.R2" && ranked[ 0 ].score == 313 &&
              ranked[ 1 ].reg == "tworeg.R1" && ranked[ 1 ].score == 109 && ms < 1.0;
    auto detail = std::ostringstream{};
    for ( const auto& r : ranked )
        detail << r.reg << "=" << r.score << " ";
    detail << "in " << ms << " ms";
    report( 1, ok, "COR scores of the two-register example, R2 first, < 1 ms", detail.str() );
}

void criterion2()
{
    auto rng = std::mt19937_64{ 20240601 };
    auto start = Clock::now();
    auto problems = Problems{};
    auto regs = 0;
    for ( int i = 0; i < 200; ++i )
    {
        auto c = gen::wrap( gen::random_dag_netlist( rng, 40 ) );
        if ( c.model.nodes().size() > 50 )
            problems.add( "DAG " + std::to_string( i ) + " has " + std::to_string( c.model.nodes().size() ) + " nodes" );
        for ( const auto& reg : c.registers )
        {
            ++regs;
            auto dp = cor( c.model, reg ).paths;
            auto brute = oracle::enumerate_paths( c.model, reg );
            if ( dp != brute )
                problems.add( "DAG " + std::to_string( i ) + " " + reg + ": " + std::to_string( dp ) +
                              " != " + std::to_string( brute ) );
        }
    }
    auto secs = since( start );
    if ( secs >= 10.0 )
        problems.add( "took " + std::to_string( secs ) + " s" );
    report( 2, problems.empty(), "DP path counts equal enumeration on 200 random DAGs <= 50 nodes, < 10 s",
            problems.empty() ? std::to_string( regs ) + " registers, " + std::to_string( secs ) + " s" : problems.text() );
}

void criteria3and4()
{
    auto rng = std::mt19937_64{ 777 };
    auto problems3 = Problems{};
    auto problems4 = Problems{};
    auto checked = 0;
    auto passes = 0;
    auto stopat_passes = 0;
    auto time3 = 0.0;
    auto time4 = 0.0;
    auto shape = gen::ModelShape{};
    shape.max_registers = 6;
    shape.gates = 45;
    shape.properties = 6;
    for ( int i = 0; i < 50; ++i )
    {
        auto c = gen::random_case( rng, shape );
        auto bound = 1 + static_cast< unsigned >( rng() % 10 );
        auto tag = "model " + std::to_string( i );
        if ( c.model.state_bits() > 14 )
            problems3.add( tag + " has " + std::to_string( c.model.state_bits() ) + " state bits" );

        auto start = Clock::now();
        auto run = BmcRun{ &c.model, c.props, {}, {} };
        run.options.bound = bound;
        auto free_run = check( run );
        auto expected = oracle::explicit_check( c.model, c.props, bound );
        time3 += since( start );
        keep_traces( free_run, c.props, tag );

        auto verdicts = std::map< std::string, const PropertyOutcome* >{};
        for ( const auto& o : free_run.outcomes )
            verdicts[ o.name ] = &o;
        for ( std::size_t k = 0; k < c.props.size(); ++k )
        {
            ++checked;
            const auto& o = *verdicts.at( c.props[ k ].name );
            passes += o.verdict == Verdict::pass ? 1 : 0;
            const auto& e = expected[ k ];
            auto where = tag + "/" + o.name;
            // An X check that starts after the bound cannot be decided either way.
            if ( o.verdict == Verdict::undetermined && o.reason == "bound" )
            {
                if ( e.fails )
                    problems3.add( where + ": undetermined but reachable" );
                continue;
            }
            if ( o.verdict == Verdict::fail && ( !e.fails || e.cycle != o.cycle ) )
                problems3.add( where + ": FAIL at " + std::to_string( o.cycle ) + ", explicit " +
                               ( e.fails ? "fails at " + std::to_string( e.cycle ) : "passes" ) );
            else if ( o.verdict == Verdict::pass && e.fails )
                problems3.add( where + ": PASS, explicit fails at " + std::to_string( e.cycle ) );
            else if ( o.verdict != Verdict::pass && o.verdict != Verdict::fail )
                problems3.add( where + ": " + std::string{ verdict_name( o.verdict ) } );
        }

        // Cut a random non-empty subset of the registers.
        start = Clock::now();
        auto cut = std::vector< std::string >{};
        for ( const auto& r : c.registers )
        {
            if ( rng() & 1u )
                cut.push_back( r );
        }
        if ( cut.empty() )
            cut.push_back( c.registers[ rng() % c.registers.size() ] );
        auto cut_run = BmcRun{ &c.model, c.props, create_stopats( c.model, cut ), {} };
        cut_run.options.bound = bound;
        auto cut_status = check( cut_run );
        time4 += since( start );
        keep_traces( cut_status, c.props, tag + " stopat" );
        for ( const auto& o : cut_status.outcomes )
        {
            if ( o.verdict != Verdict::pass )
                continue;
            ++stopat_passes;
            if ( verdicts.at( o.name )->verdict != Verdict::pass )
                problems4.add( tag + "/" + o.name + ": stopat PASS but unconstrained " +
                               std::string{ verdict_name( verdicts.at( o.name )->verdict ) } );
        }
    }
    if ( time3 >= 300 )
        problems3.add( "took " + std::to_string( time3 ) + " s" );
    if ( time4 >= 300 )
        problems4.add( "took " + std::to_string( time4 ) + " s" );
    report( 3, problems3.empty(), "BMC agrees with explicit-state search on 50 random models, < 5 min",
            problems3.empty() ? std::to_string( checked ) + " properties, " + std::to_string( passes ) + " PASS, " +
                                    std::to_string( time3 ) + " s"
                              : problems3.text() );
    report( 4, problems4.empty(), "stopat-only PASS implies unconstrained PASS, < 5 min",
            problems4.empty() ? std::to_string( stopat_passes ) + " stopat passes, 0 violations, " +
                                    std::to_string( time4 ) + " s"
                              : problems4.text() );
}

void small_design_traces()
{
    auto c = gen::wrap( read_file( small( "counter.net" ) ), "counter" );
    c.props = parse_props( read_file( small( "counter.prop" ) ), c.design, c.library );
    auto run = BmcRun{ &c.model, c.props, {}, {} };
    run.options.bound = 8;
    keep_traces( check( run ), c.props, "counter" );
}

void criteria6to8( const VerifReport& full, double full_secs, const VerifReport& formal )
{
    auto problems = Problems{};
    auto expect = [&]( const std::string& name, RowResult result, std::optional< Engine > engine,
                       unsigned iterations ) {
        const auto* r = find_row( full, name );
        if ( r == nullptr )
        {
            problems.add( "no row " + name );
            return;
        }
        if ( r->result != result )
            problems.add( name + " " + std::string{ row_result_name( r->result ) } );
        if ( engine && r->engine != *engine )
            problems.add( name + " engine " + std::string{ engine_name( r->engine ) } );
        if ( r->iterations != iterations )
            problems.add( name + " " + std::to_string( r->iterations ) + " iterations" );
    };
    expect( "ram", RowResult::finished, Engine::formal, 1 );
    expect( "can", RowResult::finished, Engine::semiformal, 2 );
    expect( "ethmac", RowResult::finished, Engine::semiformal, 3 );
    expect( "cpu", RowResult::blackboxed, Engine::semiformal, 5 );
    expect( "subsystem-1", RowResult::finished, {}, 1 );
    expect( "subsystem-2", RowResult::finished, {}, 1 );
    expect( "subsystem-3", RowResult::semiformal_fail, Engine::semiformal, 5 );
    if ( full.result != FlowResult::semiformal_fail )
        problems.add( "flow result " + std::string{ flow_result_name( full.result ) } );
    if ( full_secs >= 180 )
        problems.add( "took " + std::to_string( full_secs ) + " s" );
    auto summary = std::ostringstream{};
    for ( const auto& r : full.rows )
        summary << r.name << "=" << row_result_name( r.result ) << "/" << r.iterations << " ";
    summary << "in " << static_cast< int >( full_secs ) << " s";
    report( 6, problems.empty(), "corpus flow pattern with ip-limit 5 s, sub-limit 8 s, seed 1, < 3 min",
            problems.empty() ? summary.str() : problems.text() );

    auto ips_full = finished_rows( full, "ip" );
    auto ips_formal = finished_rows( formal, "ip" );
    auto subs_full = finished_rows( full, "subsystem" );
    auto subs_formal = finished_rows( formal, "subsystem" );
    auto ok7 = ips_full >= ips_formal + 2 && subs_full >= subs_formal + 2;
    report( 7, ok7, "full flow finishes >= 2 more IPs and >= 2 more subsystems than formal-only",
            "IPs " + std::to_string( ips_full ) + " vs " + std::to_string( ips_formal ) + ", subsystems " +
                std::to_string( subs_full ) + " vs " + std::to_string( subs_formal ) );

    auto problems8 = Problems{};
    const auto* can = find_row( full, "can" );
    auto semi = std::vector< const IterationRecord* >{};
    if ( can != nullptr )
    {
        for ( const auto& h : can->history )
        {
            if ( h.phase == 3 )
                semi.push_back( &h );
        }
    }
    if ( semi.size() != 2 )
        problems8.add( std::to_string( semi.size() ) + " semiformal iterations on can" );
    else
    {
        if ( semi[ 0 ]->constrained.size() != 1 || semi[ 0 ]->undetermined == 0 )
            problems8.add( "iteration 1 left " + std::to_string( semi[ 0 ]->undetermined ) + " undetermined" );
        if ( semi[ 1 ]->constrained.size() != 2 || semi[ 1 ]->undetermined != 0 )
            problems8.add( "iteration 2 left " + std::to_string( semi[ 1 ]->undetermined ) + " undetermined" );
    }
    auto detail8 = std::string{};
    if ( semi.size() == 2 )
    {
        detail8 = "iteration 1 {" + semi[ 0 ]->constrained[ 0 ] + "}: " + std::to_string( semi[ 0 ]->undetermined ) +
                  " undetermined; iteration 2 {" + semi[ 1 ]->constrained[ 0 ] + ", " + semi[ 1 ]->constrained.back() +
                  "}: " + std::to_string( semi[ 1 ]->undetermined ) + " undetermined";
    }
    report( 8, problems8.empty(), "CAN iteration 1 leaves undetermined properties, iteration 2 resolves all",
            problems8.empty() ? detail8 : problems8.text() );
}

void criterion5()
{
    auto problems = Problems{};
    for ( const auto& t : traces )
    {
        auto ok = t.trace.length == t.cycle + 1 && oracle::replay_trace( *t.model, t.property, t.trace, t.reset_cycles ) &&
                  replay( *t.model, t.property, t.trace, t.reset_cycles );
        if ( !ok )
            problems.add( t.origin + "/" + t.property.name );
    }
    if ( traces.empty() )
        problems.add( "no traces collected" );
    report( 5, problems.empty(), "every FAIL trace replays and violates at the reported cycle",
            problems.empty() ? std::to_string( traces.size() ) + " traces" : problems.text() );
}

void criterion9( const FlowInputs& in )
{
    auto rng = std::mt19937_64{ 9 };
    auto problems = Problems{};
    auto models = std::vector< std::pair< std::string, FlatModel > >{};
    for ( const auto& [name, ip] : in.library )
    {
        auto d = parse_design( ".design one\n.instance " + name + " u\n" );
        models.emplace_back( name, elaborate( d, in.library ) );
    }
    models.emplace_back( "gateway", elaborate( in.design, in.library ) );
    for ( const auto* f : { "counter.net", "timer.net", "tworeg.net" } )
        models.emplace_back( f, gen::wrap( read_file( small( f ) ) ).model );
    auto nets = std::size_t{ 0 };
    for ( const auto& [name, model] : models )
    {
        auto bad = oracle::dual_rail_mismatches( model, rng, 12, 100 );
        nets += model.net_count();
        if ( bad != 0 )
            problems.add( name + ": " + std::to_string( bad ) + " mismatches" );
    }
    report( 9, problems.empty(), "dual-rail evaluation matches 3-valued simulation, 100 stimuli per corpus model",
            problems.empty() ? std::to_string( models.size() ) + " models, " + std::to_string( nets ) + " nets x 12 cycles"
                             : problems.text() );
}

void criterion10()
{
    auto dir = fs::temp_directory_path() / ( "hwv_acceptance_" + std::to_string( ::getpid() ) );
    fs::create_directories( dir );
    auto args = "run --design " + corpus + "/gateway.dsn --esw " + corpus + "/boot.esw --props " + corpus +
                "/user.prop --ip-limit 5 --sub-limit 8 --seed 1 --format json --out ";
    auto a = run_cli( args + ( dir / "a.json" ).string() );
    auto b = run_cli( args + ( dir / "b.json" ).string() );
    auto ja = slurp( dir / "a.json" );
    auto jb = slurp( dir / "b.json" );
    fs::remove_all( dir );
    auto ok = a == 2 && b == 2 && !ja.empty() && ja == jb;
    report( 10, ok, "two identical run invocations give byte-identical JSON",
            "exit codes " + std::to_string( a ) + "/" + std::to_string( b ) + ", " + std::to_string( ja.size() ) +
                " bytes" + ( ja == jb ? ", identical" : ", different" ) );
}

} // namespace

int main( int argc, char** argv )
{
    // "--quick" checks only the criteria that do not run the corpus flow.
    auto quick = argc > 1 && std::string{ argv[ 1 ] } == "--quick";
    try
    {
        criterion1();
        criterion2();
        criteria3and4();
        small_design_traces();
        if ( quick )
        {
            criterion5();
            for ( const auto& [n, line] : lines )
                std::cout << line << "\n";
            return failures == 0 ? 0 : 1;
        }

        auto in = corpus_inputs();
        auto start = Clock::now();
        auto full = run_flow( in, corpus_config() );
        auto full_secs = since( start );
        for ( const auto& e : full.evidence )
            traces.push_back( { e.model, e.property, e.trace, e.trace.length - 1, e.reset_cycles, e.architecture } );
        auto config = corpus_config();
        config.formal_only = true;
        auto formal = run_flow( in, config );
        for ( const auto& e : formal.evidence )
            traces.push_back( { e.model, e.property, e.trace, e.trace.length - 1, e.reset_cycles, e.architecture } );

        criterion5();
        criteria6to8( full, full_secs, formal );
        criterion9( in );
        criterion10();
    }
    catch ( const std::exception& e )
    {
        for ( const auto& [n, line] : lines )
            std::cout << line << "\n";
        std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
        return 1;
    }
    for ( const auto& [n, line] : lines )
        std::cout << line << "\n";
    std::cout << ( failures == 0 ? "all criteria passed" : std::to_string( failures ) + " criteria failed" ) << std::endl;
    return failures == 0 ? 0 : 1;
}
