// hwverify: semiformal hardware verification driver.

#include "hwv/flow.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <map>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <tuple>

namespace
{

constexpr int exit_input_error = 3;

struct Paths
{
    std::string design;
    std::string netlist_dir;
    std::string regmap;
    std::string esw;
    std::string props;
    std::string ip;
    std::string instance;
};

struct Output
{
    std::string out;
    std::string format = "text";
    bool timing = false;
};

void emit( const Output& o, const std::string& text )
{
    if ( o.out.empty() )
    {
        std::cout << text;
        return;
    }
    auto file = std::ofstream{ o.out };
    if ( !file )
        throw hwv::Error( hwv::ErrorCode::io_error, "cannot write " + o.out );
    file << text;
}

std::string default_regmap( const std::string& design )
{
    auto p = std::filesystem::path{ design };
    p.replace_extension( ".map" );
    return p.string();
}

// A single-instance design wrapping one netlist file.
struct IpContext
{
    hwv::Design design;
    hwv::Library library;
};

IpContext load_ip( const Paths& paths )
{
    auto ips = std::vector< hwv::IpNetlist >{};
    try
    {
        ips = hwv::parse_netlists( hwv::read_file( paths.ip ) );
    }
    catch ( const hwv::Error& e )
    {
        if ( e.code() == hwv::ErrorCode::io_error )
            throw;
        throw e.in_file( paths.ip );
    }
    if ( ips.size() != 1 )
        throw hwv::Error( hwv::ErrorCode::syntax_error, "expected exactly one module" ).in_file( paths.ip );
    auto ctx = IpContext{};
    const auto& ip = ips.front();
    auto instance = paths.instance;
    if ( instance.empty() && !paths.regmap.empty() )
    {
        // The one register-map instance whose registers all belong to this IP.
        auto map = hwv::parse_regmap( hwv::read_file( paths.regmap ) );
        auto candidates = std::map< std::string, bool >{};
        for ( const auto& e : map.entries )
        {
            auto inst = hwv::instance_of( e.reg );
            const auto* reg = ip.find_register( std::string_view{ e.reg }.substr( inst.size() + 1 ) );
            auto fits = reg != nullptr && reg->software_visible;
            auto [it, fresh] = candidates.emplace( inst, fits );
            if ( !fresh )
                it->second = it->second && fits;
        }
        for ( const auto& [inst, fits] : candidates )
        {
            if ( !fits )
                continue;
            if ( !instance.empty() )
                throw hwv::Error( hwv::ErrorCode::unknown_instance,
                                  "register map matches several instances; pass --instance" );
            instance = inst;
        }
    }
    if ( instance.empty() )
        instance = ip.name;
    ctx.design.name = ip.name;
    ctx.design.instances.push_back( { ip.name, instance } );
    ctx.library.emplace( ip.name, ip );
    return ctx;
}

hwv::RegisterMap load_regmap_for( const std::string& path, const hwv::Design& design, const hwv::Library& library )
{
    auto map = hwv::parse_regmap( hwv::read_file( path ) );
    auto kept = hwv::RegisterMap{};
    for ( const auto& e : map.entries )
    {
        if ( design.find_instance( hwv::instance_of( e.reg ) ) != nullptr )
            kept.entries.push_back( e );
    }
    hwv::check_regmap( kept, design, library );
    return kept;
}

void add_flow_options( CLI::App& cmd, Paths& paths, hwv::FlowConfig& cfg, Output& out )
{
    cmd.add_option( "--design", paths.design, "design file" )->required();
    cmd.add_option( "--netlist-dir", paths.netlist_dir, "directory of *.net files (default: design directory)" );
    cmd.add_option( "--regmap", paths.regmap, "register map (default: design path with .map)" );
    cmd.add_option( "--esw", paths.esw, "embedded-software script" )->required();
    cmd.add_option( "--props", paths.props, "property file" );
    cmd.add_option( "--ip-limit", cfg.ip_limit, "seconds per IP check" )->check( CLI::PositiveNumber );
    cmd.add_option( "--sub-limit", cfg.sub_limit, "seconds per subsystem check" )->check( CLI::PositiveNumber );
    cmd.add_option( "--bound", cfg.bound, "BMC bound in cycles" )->check( CLI::Range( 1u, 100000u ) );
    cmd.add_option( "--blackbox-failing", cfg.blackbox_failing, "blackbox IPs that stay unresolved" );
    cmd.add_option( "--seed", cfg.seed, "simulation and solver seed" );
    cmd.add_option( "--jobs", cfg.jobs, "parallel property checks" )->check( CLI::Range( 1u, 256u ) );
    cmd.add_option( "--settle", cfg.settle, "cycles after reset before X checks apply" );
    cmd.add_option( "--path-weight", cfg.weights.path, "COR weight of a path" );
    cmd.add_option( "--element-weight", cfg.weights.element, "COR weight of an element" );
    cmd.add_flag( "--multiplicity", cfg.multiplicity, "count first-layer elements once per path" );
    cmd.add_option( "--out", out.out, "report file (default: stdout)" );
    cmd.add_option( "--format", out.format, "report format" )->check( CLI::IsMember( { "text", "json" } ) );
    cmd.add_flag( "--timing", out.timing, "include wall-clock times in JSON" );
    cmd.add_option( "--dump-cnf", cfg.dump_cnf_dir, "directory for DIMACS dumps" );
    cmd.add_option( "--dump-trace", cfg.dump_trace_dir, "directory for counterexample dumps" );
    cmd.add_option( "--solver", cfg.external_solver, "external DIMACS solver command" );
}

int run_flow_command( Paths& paths, const hwv::FlowConfig& cfg, const Output& out )
{
    if ( paths.regmap.empty() )
        paths.regmap = default_regmap( paths.design );
    auto inputs = hwv::load_inputs( paths.design, paths.netlist_dir, paths.regmap, paths.esw, paths.props );
    auto report = hwv::run_flow( inputs, cfg );
    if ( out.format == "json" )
        emit( out, hwv::report_json( report, { out.timing } ) );
    else
        emit( out, hwv::report_text( report ) );
    return hwv::exit_code( report.result );
}

} // namespace

int main( int argc, char** argv )
{
    auto app = CLI::App{ "Semiformal verification of IP-based hardware designs" };
    app.require_subcommand( 1 );

    auto paths = Paths{};
    auto cfg = hwv::FlowConfig{};
    auto out = Output{};

    auto* run = app.add_subcommand( "run", "run the full flow" );
    add_flow_options( *run, paths, cfg, out );
    run->add_flag( "--formal-only", cfg.formal_only, "skip the simulation-assisted phases" );

    auto phase_arg = std::string{};
    auto* phase = app.add_subcommand( "phase", "run the flow up to a phase (1-5) or the formal-only subset" );
    phase->add_option( "phase", phase_arg, "1..5 or formal" )->required()->check(
        CLI::IsMember( { "1", "2", "3", "4", "5", "formal" } ) );
    add_flow_options( *phase, paths, cfg, out );

    auto* sra = app.add_subcommand( "sra-rank", "rank software-visible registers of an IP" );
    sra->add_option( "--ip", paths.ip, "netlist of the IP" )->required();
    sra->add_option( "--regmap", paths.regmap, "register map" )->required();
    sra->add_option( "--instance", paths.instance, "instance name used by the register map" );
    sra->add_option( "--path-weight", cfg.weights.path, "COR weight of a path" );
    sra->add_option( "--element-weight", cfg.weights.element, "COR weight of an element" );
    sra->add_flag( "--multiplicity", cfg.multiplicity, "count first-layer elements once per path" );
    sra->add_option( "--out", out.out, "output file" );
    sra->add_option( "--format", out.format, "output format" )->check( CLI::IsMember( { "text", "json" } ) );

    auto bmc_opts = hwv::BmcOptions{};
    auto stopat_regs = std::vector< std::string >{};
    auto assume_specs = std::vector< std::string >{};
    auto blackbox_insts = std::vector< std::string >{};
    auto with_xprops = false;
    auto* bmc = app.add_subcommand( "bmc", "bounded model check of one IP or design" );
    auto* bmc_ip = bmc->add_option( "--ip", paths.ip, "netlist of the IP" );
    auto* bmc_design = bmc->add_option( "--design", paths.design, "design file" );
    bmc_ip->excludes( bmc_design );
    bmc->add_option( "--netlist-dir", paths.netlist_dir, "directory of *.net files" );
    bmc->add_option( "--instance", paths.instance, "instance name for --ip (default: module name)" );
    bmc->add_option( "--props", paths.props, "property file" );
    bmc->add_flag( "--xprop", with_xprops, "add X-propagation properties for every register" );
    bmc->add_option( "--bound", bmc_opts.bound, "bound in cycles" )->check( CLI::Range( 1u, 100000u ) );
    bmc->add_option( "--time-limit", bmc_opts.budget, "seconds" )->check( CLI::PositiveNumber );
    bmc->add_option( "--stopat", stopat_regs, "register left unconstrained" );
    bmc->add_option( "--assume", assume_specs, "REG=VALUE pin of a stopat register" );
    bmc->add_option( "--blackbox", blackbox_insts, "instance to blackbox" );
    bmc->add_option( "--seed", bmc_opts.seed, "solver seed" );
    bmc->add_option( "--jobs", bmc_opts.jobs, "parallel property checks" )->check( CLI::Range( 1u, 256u ) );
    bmc->add_option( "--dump-cnf", bmc_opts.dump_cnf_dir, "directory for DIMACS dumps" );
    bmc->add_option( "--dump-trace", bmc_opts.dump_trace_dir, "directory for counterexample dumps" );
    bmc->add_option( "--solver", bmc_opts.external_solver, "external DIMACS solver command" );
    bmc->add_option( "--out", out.out, "output file" );

    auto dump_values = std::string{};
    auto* sim = app.add_subcommand( "sim", "simulate a design under its embedded-software script" );
    sim->add_option( "--design", paths.design, "design file" )->required();
    sim->add_option( "--netlist-dir", paths.netlist_dir, "directory of *.net files" );
    sim->add_option( "--regmap", paths.regmap, "register map (default: design path with .map)" );
    sim->add_option( "--esw", paths.esw, "embedded-software script" )->required();
    sim->add_option( "--seed", cfg.seed, "seed for free inputs" );
    sim->add_option( "--dump-values", dump_values, "write 'cycle signal value' change lines here" );
    sim->add_option( "--out", out.out, "output file" );

    auto* gen = app.add_subcommand( "gen-xprop", "list X-propagation properties" );
    auto* gen_ip = gen->add_option( "--ip", paths.ip, "netlist of the IP" );
    auto* gen_design = gen->add_option( "--design", paths.design, "design file" );
    gen_ip->excludes( gen_design );
    gen->add_option( "--netlist-dir", paths.netlist_dir, "directory of *.net files" );
    gen->add_option( "--instance", paths.instance, "instance name for --ip (default: module name)" );
    gen->add_option( "--settle", cfg.settle, "cycles after reset before X checks apply" );
    gen->add_option( "--out", out.out, "output file" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::CallForHelp& e )
    {
        return app.exit( e );
    }
    catch ( const CLI::ParseError& e )
    {
        app.exit( e );
        std::cerr << app.help();
        return exit_input_error;
    }

    try
    {
        if ( run->parsed() )
            return run_flow_command( paths, cfg, out );

        if ( phase->parsed() )
        {
            if ( phase_arg == "formal" )
                cfg.formal_only = true;
            else
                cfg.last_phase = static_cast< unsigned >( std::stoul( phase_arg ) );
            return run_flow_command( paths, cfg, out );
        }

        if ( sra->parsed() )
        {
            auto ctx = load_ip( paths );
            auto map = load_regmap_for( paths.regmap, ctx.design, ctx.library );
            auto model = hwv::elaborate( ctx.design, ctx.library );
            auto ranked = hwv::do_sra( model, map, cfg.weights, cfg.multiplicity );
            auto text = std::ostringstream{};
            if ( out.format == "json" )
            {
                text << "[\n";
                for ( std::size_t i = 0; i < ranked.size(); ++i )
                    text << "  {\"register\": \"" << ranked[ i ].reg << "\", \"paths\": " << ranked[ i ].paths
                         << ", \"elements\": " << ranked[ i ].elements << ", \"cor\": " << ranked[ i ].score << "}"
                         << ( i + 1 < ranked.size() ? "," : "" ) << "\n";
                text << "]\n";
            }
            else
            {
                text << "register            paths    elements  COR\n";
                for ( const auto& s : ranked )
                {
                    auto name = s.reg;
                    name.resize( std::max< std::size_t >( name.size() + 1, 20 ), ' ' );
                    auto paths_col = std::to_string( s.paths );
                    paths_col.resize( std::max< std::size_t >( paths_col.size() + 1, 9 ), ' ' );
                    auto elems_col = std::to_string( s.elements );
                    elems_col.resize( std::max< std::size_t >( elems_col.size() + 1, 10 ), ' ' );
                    text << name << paths_col << elems_col << s.score << "\n";
                }
            }
            emit( out, text.str() );
            return 0;
        }

        if ( bmc->parsed() )
        {
            auto design = hwv::Design{};
            auto library = hwv::Library{};
            if ( !paths.ip.empty() )
            {
                auto ctx = load_ip( paths );
                design = std::move( ctx.design );
                library = std::move( ctx.library );
            }
            else if ( !paths.design.empty() )
            {
                std::tie( design, library ) = hwv::load_design( paths.design, paths.netlist_dir );
            }
            else
                throw CLI::RequiredError( "--ip or --design" );

            auto props = std::vector< hwv::PropertyAst >{};
            if ( !paths.props.empty() )
                props = hwv::parse_props( hwv::read_file( paths.props ), design, library );
            if ( with_xprops )
            {
                auto x = hwv::generate_xprops( design, library );
                props.insert( props.end(), x.begin(), x.end() );
            }
            auto model = hwv::elaborate( design, library );

            auto constraints = hwv::create_blackboxes( blackbox_insts );
            auto stopats = hwv::create_stopats( model, stopat_regs );
            auto captured = hwv::CapturedValues{};
            for ( const auto& spec : assume_specs )
            {
                auto eq = spec.find( '=' );
                if ( eq == std::string::npos )
                    throw hwv::Error( hwv::ErrorCode::syntax_error, "--assume expects REG=VALUE, got " + spec );
                auto reg = spec.substr( 0, eq );
                const auto* r = model.find_register( reg );
                if ( r == nullptr )
                    throw hwv::Error( hwv::ErrorCode::unknown_register, "unknown register " + reg );
                auto value = std::stoull( spec.substr( eq + 1 ), nullptr, 0 );
                auto bits = std::vector< bool >( r->bits.size() );
                for ( std::size_t i = 0; i < bits.size(); ++i )
                    bits[ i ] = i < 64 && ( ( value >> i ) & 1u ) != 0;
                if ( r->bits.size() < 64 && ( value >> r->bits.size() ) != 0 )
                    throw hwv::Error( hwv::ErrorCode::width_overflow, "value of " + reg + " exceeds its width" );
                captured.values[ reg ] = bits;
            }
            auto assumes = hwv::create_assumes( captured, stopats );
            constraints.insert( constraints.end(), stopats.begin(), stopats.end() );
            constraints.insert( constraints.end(), assumes.begin(), assumes.end() );

            auto status = hwv::check( { &model, props, constraints, bmc_opts } );
            auto text = std::ostringstream{};
            auto any_fail = false;
            for ( const auto& o : status.outcomes )
            {
                text << o.name << ": " << hwv::verdict_name( o.verdict );
                if ( o.verdict == hwv::Verdict::fail )
                    text << " at cycle " << o.cycle << " (trace length " << o.trace->length << ")";
                else if ( o.verdict == hwv::Verdict::pass )
                    text << " (bound " << o.cycle << ")";
                if ( !o.reason.empty() )
                    text << " (" << o.reason << ")";
                text << "\n";
                if ( o.trace )
                    text << hwv::format_trace( *o.trace );
                any_fail = any_fail || o.verdict == hwv::Verdict::fail;
            }
            emit( out, text.str() );
            if ( any_fail )
                return 1;
            return status.complete ? 0 : 2;
        }

        if ( sim->parsed() )
        {
            if ( paths.regmap.empty() )
                paths.regmap = default_regmap( paths.design );
            auto in = hwv::load_inputs( paths.design, paths.netlist_dir, paths.regmap, paths.esw, {} );
            auto model = hwv::elaborate( in.design, in.library );
            auto simulator = hwv::Simulator{ model, in.regmap, cfg.seed };
            auto dump = std::ofstream{};
            if ( !dump_values.empty() )
            {
                dump.open( dump_values );
                if ( !dump )
                    throw hwv::Error( hwv::ErrorCode::io_error, "cannot write " + dump_values );
                simulator.set_dump( &dump );
            }
            auto state = simulator.start();
            simulator.run_until_poi( in.esw, {}, state );
            auto text = std::ostringstream{};
            text << "cycles " << state.cycle << "\n";
            for ( const auto& r : model.registers() )
                text << r.name << " " << hwv::bits_string( state.values, r.bits ) << "\n";
            for ( const auto& d : simulator.diagnostics() )
                text << "warning: cycle " << d.cycle << ": " << d.message << "\n";
            emit( out, text.str() );
            return 0;
        }

        if ( gen->parsed() )
        {
            auto design = hwv::Design{};
            auto library = hwv::Library{};
            if ( !paths.ip.empty() )
            {
                auto ctx = load_ip( paths );
                design = std::move( ctx.design );
                library = std::move( ctx.library );
            }
            else if ( !paths.design.empty() )
            {
                std::tie( design, library ) = hwv::load_design( paths.design, paths.netlist_dir );
            }
            else
                throw CLI::RequiredError( "--ip or --design" );
            emit( out, hwv::serialize( hwv::generate_xprops( design, library, cfg.settle ) ) );
            return 0;
        }
    }
    catch ( const CLI::Error& e )
    {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return exit_input_error;
    }
    catch ( const hwv::Error& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_input_error;
    }
    return exit_input_error;
}
