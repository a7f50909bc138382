#include <doctest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace
{

struct Result
{
    int status = -1;
    std::string out;
};

// Runs the CLI with stderr folded into stdout.
Result run( const std::string& args )
{
    auto cmd = std::string{ HWV_CLI_PATH } + " " + args + " 2>&1";
    auto* pipe = popen( cmd.c_str(), "r" );
    REQUIRE( pipe != nullptr );
    auto r = Result{};
    auto buf = std::array< char, 4096 >{};
    while ( auto n = fread( buf.data(), 1, buf.size(), pipe ) )
        r.out.append( buf.data(), n );
    auto st = pclose( pipe );
    r.status = WIFEXITED( st ) ? WEXITSTATUS( st ) : -1;
    return r;
}

std::string small( const std::string& file ) { return std::string{ HWV_CORPUS_DIR } + "/small/" + file; }

// A temporary directory holding a one-timer design next to its netlist.
struct TimerDir
{
    fs::path dir;

    TimerDir()
    {
        dir = fs::temp_directory_path() / ( "hwv_cli_" + std::to_string( ::getpid() ) );
        fs::create_directories( dir );
        fs::copy_file( small( "timer.net" ), dir / "timer.net", fs::copy_options::overwrite_existing );
        fs::copy_file( small( "timer.map" ), dir / "timer.map", fs::copy_options::overwrite_existing );
        fs::copy_file( small( "timer.prop" ), dir / "timer.prop", fs::copy_options::overwrite_existing );
        std::ofstream( dir / "timer.dsn" ) << ".design t\n.instance timer timer\n";
        std::ofstream( dir / "boot.esw" ) << "reset 2\nwrite 0x0 0x0\nwrite 0x40 1\nwait 2\n";
    }
    ~TimerDir() { fs::remove_all( dir ); }

    std::string operator/( const std::string& f ) const { return ( dir / f ).string(); }
};

} // namespace

TEST_CASE( "usage errors exit with code 3" )
{
    CHECK( run( "" ).status == 3 );
    auto r = run( "run --esw x.esw" );
    CHECK( r.status == 3 );
    CHECK( r.out.find( "--design" ) != std::string::npos );
    CHECK( run( "bmc --ip " + small( "counter.net" ) + " --props /nonexistent.prop" ).status == 3 );
    CHECK( run( "run --design /nonexistent.dsn --esw /nonexistent.esw" ).status == 3 );
    CHECK( run( "phase 9 --design a --esw b" ).status == 3 );
}

TEST_CASE( "sra-rank prints the ranking" )
{
    auto r = run( "sra-rank --ip " + small( "tworeg.net" ) + " --regmap " + small( "tworeg.map" ) );
    CHECK( r.status == 0 );
    CHECK( r.out.find( "tworeg.R2" ) < r.out.find( "tworeg.R1" ) );
    CHECK( r.out.find( "313" ) != std::string::npos );

    r = run( "sra-rank --ip " + small( "tworeg.net" ) + " --regmap " + small( "tworeg.map" ) + " --format json" );
    auto j = nlohmann::json::parse( r.out );
    REQUIRE( j.size() == 2 );
    CHECK( j[ 0 ][ "register" ] == "tworeg.R2" );
    CHECK( j[ 0 ][ "cor" ] == 313 );
    CHECK( j[ 1 ][ "cor" ] == 109 );
}

TEST_CASE( "bmc exit status reflects the verdicts" )
{
    auto r = run( "bmc --ip " + small( "counter.net" ) + " --props " + small( "counter.prop" ) + " --bound 6" );
    CHECK( r.status == 1 );
    CHECK( r.out.find( "never3: FAIL at cycle 3" ) != std::string::npos );
    CHECK( r.out.find( "below4: PASS" ) != std::string::npos );

    r = run( "bmc --ip " + small( "counter.net" ) + " --props " + small( "counter.prop" ) + " --bound 3" );
    CHECK( r.status == 0 );

    r = run( "bmc --ip " + small( "timer.net" ) + " --props " + small( "timer.prop" ) + " --bound 20 --time-limit 0.3" );
    CHECK( r.status == 2 );

    r = run( "bmc --ip " + small( "timer.net" ) + " --props " + small( "timer.prop" ) +
             " --bound 20 --stopat timer.CTRL --assume timer.CTRL=0" );
    CHECK( r.status == 0 );
}

TEST_CASE( "gen-xprop lists one obligation per register" )
{
    auto r = run( "gen-xprop --ip " + small( "timer.net" ) + " --settle 2" );
    CHECK( r.status == 0 );
    CHECK( r.out.find( "xprop_timer_CTRL" ) != std::string::npos );
    CHECK( r.out.find( "xprop_timer_acc" ) != std::string::npos );
    CHECK( r.out.find( "settle=2" ) != std::string::npos );
}

TEST_CASE( "run produces text and JSON reports" )
{
    auto d = TimerDir{};
    auto base = "run --design " + ( d / "timer.dsn" ) + " --esw " + ( d / "boot.esw" ) + " --props " +
                ( d / "timer.prop" ) + " --ip-limit 0.5";
    auto r = run( base );
    CHECK( r.status == 0 );
    CHECK( r.out.find( "SEMIFORMAL_COMPLETE" ) != std::string::npos );
    CHECK( r.out.find( "0x40" ) != std::string::npos );

    r = run( base + " --format json --out " + ( d / "report.json" ) );
    CHECK( r.status == 0 );
    auto j = nlohmann::json::parse( std::ifstream( d / "report.json" ) );
    CHECK( j[ "result" ] == "SEMIFORMAL_COMPLETE" );
    CHECK( j[ "rows" ][ 0 ][ "name" ] == "timer" );

    r = run( base + " --formal-only" );
    CHECK( r.status == 2 );
    CHECK( r.out.find( "FORMAL_INCOMPLETE" ) != std::string::npos );

    r = run( "phase 1 --design " + ( d / "timer.dsn" ) + " --esw " + ( d / "boot.esw" ) );
    CHECK( r.status == 0 );
}

TEST_CASE( "sim reports bus decode errors" )
{
    auto d = TimerDir{};
    auto r = run( "sim --design " + ( d / "timer.dsn" ) + " --esw " + ( d / "boot.esw" ) + " --dump-values " +
                  ( d / "values.txt" ) );
    CHECK( r.status == 0 );
    CHECK( r.out.find( "BusDecodeError" ) != std::string::npos );
    auto dump = std::ifstream( d / "values.txt" );
    auto text = std::string( std::istreambuf_iterator< char >( dump ), {} );
    CHECK( text.find( "timer.CTRL" ) != std::string::npos );
}
