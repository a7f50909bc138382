#include "hwv/flow.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

namespace hwv
{

namespace
{

std::string hex( std::uint32_t v )
{
    auto out = std::ostringstream{};
    out << "0x" << std::hex << v;
    return out.str();
}

const std::string& module_name( const Design& design, const std::string& instance )
{
    return design.find_instance( instance )->module;
}

// Mutable state threaded through the phases.
struct FlowState
{
    const FlowInputs& in;
    const FlowConfig& cfg;
    Preprocessed pre;
    VerifReport report;
    std::vector< std::string > ranked_names;
    std::set< std::string > blackboxed_instances;
    // Registers that made their IP provable in Phase 3.
    std::vector< std::string > carryover;
    bool used_semiformal = false;
    unsigned dump_counter = 0;

    FlowState( const FlowInputs& inputs, const FlowConfig& config ) : in( inputs ), cfg( config ) {}

    ReportRow& row( const std::string& name )
    {
        return *std::find_if( report.rows.begin(), report.rows.end(), [&]( const auto& r ) { return r.name == name; } );
    }

    BmcOptions options( double budget, const std::string& arch )
    {
        auto opt = BmcOptions{};
        opt.bound = cfg.bound;
        opt.budget = budget;
        opt.reset_cycles = cfg.reset_cycles;
        opt.jobs = cfg.jobs;
        opt.seed = cfg.seed;
        opt.external_solver = cfg.external_solver;
        auto sub = arch + "." + std::to_string( ++dump_counter );
        if ( !cfg.dump_cnf_dir.empty() )
            opt.dump_cnf_dir = ( std::filesystem::path{ cfg.dump_cnf_dir } / sub ).string();
        if ( !cfg.dump_trace_dir.empty() )
            opt.dump_trace_dir = ( std::filesystem::path{ cfg.dump_trace_dir } / sub ).string();
        return opt;
    }
};

IterationRecord tally( const BmcStatus& status )
{
    auto rec = IterationRecord{};
    for ( const auto& o : status.outcomes )
    {
        if ( o.verdict == Verdict::vacuous )
            ++rec.vacuous;
        else if ( o.verdict == Verdict::undetermined )
            ++rec.undetermined;
        else
            ++rec.resolved;
    }
    rec.elapsed = status.elapsed;
    return rec;
}

// Fills the row's verdicts from the run that decided it.
void settle_row( FlowState& st, ReportRow& row, const BmcStatus& status, const std::vector< PropertyAst >& props )
{
    row.properties.clear();
    row.resolved = row.undetermined = row.vacuous = 0;
    std::erase_if( st.report.evidence, [&]( const auto& e ) { return e.architecture == row.name; } );
    for ( const auto& o : status.outcomes )
    {
        row.properties.push_back( { o.name, o.verdict, o.cycle, o.reason } );
        if ( o.verdict == Verdict::vacuous )
            ++row.vacuous;
        else if ( o.verdict == Verdict::undetermined )
            ++row.undetermined;
        else
            ++row.resolved;
        if ( o.verdict == Verdict::fail && o.trace )
        {
            auto it = std::find_if( props.begin(), props.end(), [&]( const auto& p ) { return p.name == o.name; } );
            st.report.evidence.push_back( { row.name, *it, status.checked_model, *o.trace, st.cfg.reset_cycles } );
        }
    }
}

void mark_all( ReportRow& row, Verdict verdict, const std::string& reason, const std::vector< PropertyAst >& props )
{
    row.properties.clear();
    for ( const auto& p : props )
        row.properties.push_back( { p.name, verdict, 0, reason } );
    std::sort( row.properties.begin(), row.properties.end(),
               []( const auto& a, const auto& b ) { return a.name < b.name; } );
    row.resolved = 0;
    row.undetermined = verdict == Verdict::undetermined ? props.size() : 0;
    row.vacuous = verdict == Verdict::vacuous ? props.size() : 0;
}

std::vector< std::string > instance_prefix( const FlowState& st, std::size_t count )
{
    return { st.ranked_names.begin(), st.ranked_names.begin() + static_cast< std::ptrdiff_t >( count ) };
}

// Representative instance of every unique module, in ranking order.
std::vector< std::pair< std::string, std::string > > representatives( const FlowState& st )
{
    auto out = std::vector< std::pair< std::string, std::string > >{};
    auto seen = std::set< std::string >{};
    for ( const auto& inst : st.ranked_names )
    {
        const auto& mod = module_name( st.in.design, inst );
        if ( seen.insert( mod ).second )
            out.emplace_back( mod, inst );
    }
    return out;
}

std::vector< PropertyAst > ip_props( const FlowState& st, const std::string& module, const std::string& rep )
{
    auto out = std::vector< PropertyAst >{};
    auto it = st.pre.groups.find( module );
    if ( it == st.pre.groups.end() )
        return out;
    for ( const auto& p : it->second )
    {
        auto inst = *p.scope.begin();
        out.push_back( inst == rep ? p : rename_instance( p, inst, rep ) );
    }
    return out;
}

const std::vector< PropertyAst >& group( const FlowState& st, const std::string& name )
{
    static const auto empty = std::vector< PropertyAst >{};
    auto it = st.pre.groups.find( name );
    return it == st.pre.groups.end() ? empty : it->second;
}

struct Subsystem
{
    std::vector< std::string > instances;
    FlatModel model;
    std::vector< Constraint > blackboxes;
    // The model with blackboxes applied; used for ranking and for stopats.
    FlatModel reduced;
};

Subsystem build_subsystem( const FlowState& st, std::size_t count )
{
    auto sub = Subsystem{};
    sub.instances = instance_prefix( st, count );
    sub.model = elaborate( subdesign( st.in.design, sub.instances ), st.in.library );
    auto bb = std::vector< std::string >{};
    for ( const auto& i : sub.instances )
    {
        if ( st.blackboxed_instances.count( i ) != 0 )
            bb.push_back( i );
    }
    sub.blackboxes = create_blackboxes( bb );
    sub.reduced = apply_blackboxes( sub.model, sub.blackboxes );
    return sub;
}

std::vector< std::string > names_of( const std::vector< CorScore >& ranked )
{
    auto out = std::vector< std::string >{};
    for ( const auto& s : ranked )
        out.push_back( s.reg );
    return out;
}

// Phase 2: every unique IP on its own, no constraints.
void phase2( FlowState& st, std::vector< std::pair< std::string, std::string > >& marked )
{
    for ( const auto& [mod, rep] : representatives( st ) )
    {
        auto& row = st.row( mod );
        auto props = ip_props( st, mod, rep );
        auto model = elaborate( subdesign( st.in.design, std::vector< std::string >{ rep } ), st.in.library );
        auto run = BmcRun{ &model, props, {}, st.options( st.cfg.ip_limit, mod ) };
        auto status = check( run );
        auto rec = tally( status );
        rec.phase = 2;
        row.history.push_back( rec );
        row.iterations = 1;
        row.elapsed = status.elapsed;
        row.engine = Engine::formal;
        settle_row( st, row, status, props );
        if ( status.complete )
            row.result = RowResult::finished;
        else
        {
            row.result = RowResult::timeout;
            marked.emplace_back( mod, rep );
        }
    }
}

// Phase 3: IPs that timed out, with registers pinned to simulated values.
// Returns false when the flow must stop with a semiformal failure.
bool phase3( FlowState& st, const std::vector< std::pair< std::string, std::string > >& marked, const FlatModel& full )
{
    if ( marked.empty() )
        return true;
    st.used_semiformal = true;
    auto sim = Simulator{ full, st.in.regmap, st.cfg.seed };
    auto state = sim.start();

    for ( const auto& [mod, rep] : marked )
    {
        auto& row = st.row( mod );
        row.engine = Engine::semiformal;
        auto props = ip_props( st, mod, rep );
        auto model = elaborate( subdesign( st.in.design, std::vector< std::string >{ rep } ), st.in.library );
        auto ranked = do_sra( model, st.in.regmap, st.cfg.weights, st.cfg.multiplicity );
        auto pois = set_pois( st.in.regmap, names_of( ranked ), st.in.esw );
        sim.run_until_poi( st.in.esw, pois, state );

        auto success = false;
        for ( std::size_t n = 1; n <= ranked.size(); ++n )
        {
            auto regs = combine_regs( ranked, n );
            auto captured = collect_sim_values( full, state, regs );
            auto constraints = create_stopats( model, regs );
            auto assumes = create_assumes( captured, constraints );
            constraints.insert( constraints.end(), assumes.begin(), assumes.end() );

            auto run = BmcRun{ &model, props, constraints, st.options( st.cfg.ip_limit, mod ) };
            auto status = check( run );
            auto rec = tally( status );
            rec.phase = 3;
            rec.iteration = static_cast< unsigned >( n );
            rec.constrained = regs;
            rec.capture_cycle = state.cycle;
            row.history.push_back( rec );
            row.iterations = static_cast< unsigned >( n );
            row.elapsed += status.elapsed;
            settle_row( st, row, status, props );
            if ( status.complete )
            {
                success = true;
                st.carryover.insert( st.carryover.end(), regs.begin(), regs.end() );
                break;
            }
        }
        if ( success )
        {
            row.result = RowResult::finished;
            continue;
        }
        if ( !st.cfg.blackbox_failing )
        {
            row.result = RowResult::semiformal_fail;
            return false;
        }
        row.result = RowResult::blackboxed;
        mark_all( row, Verdict::vacuous, "blackboxed", props );
        for ( const auto& inst : st.ranked_names )
        {
            if ( module_name( st.in.design, inst ) == mod )
                st.blackboxed_instances.insert( inst );
        }
    }
    return true;
}

// Phase 4: grow subsystems formally from the two top-ranked IPs. Returns the
// instance count of the first subsystem left incomplete, or 0 when all pass.
std::size_t phase4( FlowState& st )
{
    const auto total = st.ranked_names.size();
    for ( std::size_t count = 2; count <= total; ++count )
    {
        auto name = subsystem_name( count - 1 );
        auto& row = st.row( name );
        const auto& props = group( st, name );
        auto sub = build_subsystem( st, count );
        auto run = BmcRun{ &sub.model, props, sub.blackboxes, st.options( st.cfg.sub_limit, name ) };
        auto status = check( run );
        auto rec = tally( status );
        rec.phase = 4;
        row.history.push_back( rec );
        row.iterations = 1;
        row.elapsed = status.elapsed;
        row.engine = Engine::formal;
        settle_row( st, row, status, props );
        if ( !status.complete )
        {
            row.result = RowResult::timeout;
            return count;
        }
        row.result = RowResult::finished;
    }
    return 0;
}

// Phase 5: semiformal subsystem checks starting at the incomplete one.
bool phase5( FlowState& st, std::size_t count, const FlatModel& full )
{
    st.used_semiformal = true;
    auto sim = Simulator{ full, st.in.regmap, st.cfg.seed };
    const auto total = st.ranked_names.size();
    for ( ; count <= total; ++count )
    {
        auto name = subsystem_name( count - 1 );
        auto& row = st.row( name );
        row.engine = Engine::semiformal;
        const auto& props = group( st, name );
        auto sub = build_subsystem( st, count );

        auto ranked = do_sra( sub.reduced, st.in.regmap, st.cfg.weights, st.cfg.multiplicity );
        std::erase_if( ranked, [&]( const auto& s ) {
            return std::find( st.carryover.begin(), st.carryover.end(), s.reg ) != st.carryover.end();
        } );
        auto carried = std::vector< std::string >{};
        for ( const auto& r : st.carryover )
        {
            if ( sub.reduced.find_register( r ) != nullptr )
                carried.push_back( r );
        }

        auto state = sim.start();
        sim.run_until_poi( st.in.esw, set_pois( st.in.regmap, names_of( ranked ), st.in.esw ), state );

        auto success = false;
        const auto iterations = std::max< std::size_t >( 1, ranked.size() );
        for ( std::size_t n = 1; n <= iterations; ++n )
        {
            auto regs = carried;
            if ( !ranked.empty() )
            {
                auto top = combine_regs( ranked, n );
                regs.insert( regs.end(), top.begin(), top.end() );
            }
            auto captured = collect_sim_values( full, state, regs );
            auto constraints = sub.blackboxes;
            auto stopats = create_stopats( sub.reduced, regs );
            auto assumes = create_assumes( captured, stopats );
            constraints.insert( constraints.end(), stopats.begin(), stopats.end() );
            constraints.insert( constraints.end(), assumes.begin(), assumes.end() );

            auto run = BmcRun{ &sub.model, props, constraints, st.options( st.cfg.sub_limit, name ) };
            auto status = check( run );
            auto rec = tally( status );
            rec.phase = 5;
            rec.iteration = static_cast< unsigned >( n );
            rec.constrained = regs;
            rec.capture_cycle = state.cycle;
            row.history.push_back( rec );
            row.iterations = static_cast< unsigned >( n );
            row.elapsed += status.elapsed;
            settle_row( st, row, status, props );
            if ( status.complete )
            {
                success = true;
                break;
            }
        }
        if ( !success )
        {
            row.result = RowResult::semiformal_fail;
            return false;
        }
        row.result = RowResult::finished;
    }
    return true;
}

void add_sim_warnings( FlowState& st, const FlatModel& full )
{
    // Bus decode errors are a property of the script, so one simulation pass
    // reports them all.
    auto sim = Simulator{ full, st.in.regmap, st.cfg.seed };
    auto state = sim.start();
    sim.run_until_poi( st.in.esw, {}, state );
    for ( const auto& d : sim.diagnostics() )
        st.report.warnings.push_back( "cycle " + std::to_string( d.cycle ) + ": " + d.message );
}

void finish( FlowState& st )
{
    auto& r = st.report;
    r.total = r.resolved = r.undetermined = r.vacuous = 0;
    for ( auto& row : r.rows )
    {
        if ( row.result == RowResult::skipped )
            mark_all( row, Verdict::undetermined, "skipped", group( st, row.name ) );
        r.total += row.total;
        r.resolved += row.resolved;
        r.undetermined += row.undetermined;
        r.vacuous += row.vacuous;
    }
    std::erase_if( r.evidence, [&]( const FailureEvidence& e ) {
        const auto& props = st.row( e.architecture ).properties;
        return std::none_of( props.begin(), props.end(), [&]( const auto& p ) {
            return p.name == e.property.name && p.verdict == Verdict::fail;
        } );
    } );
    r.no_obligations = r.total == 0;
    r.coverage = r.total == 0 ? 1.0 : static_cast< double >( r.resolved ) / static_cast< double >( r.total );
}

} // namespace

namespace
{

template < typename Fn >
auto attributed( const std::string& path, Fn&& fn )
{
    try
    {
        return fn( read_file( path ) );
    }
    catch ( const Error& e )
    {
        if ( !e.file().empty() || e.code() == ErrorCode::io_error )
            throw;
        throw e.in_file( path );
    }
}

} // namespace

std::pair< Design, Library > load_design( const std::string& design_path, const std::string& netlist_dir )
{
    namespace fs = std::filesystem;
    auto design = attributed( design_path, []( const std::string& t ) { return parse_design( t ); } );
    auto library = Library{};

    auto dir = fs::path{ netlist_dir.empty() ? fs::path{ design_path }.parent_path() : fs::path{ netlist_dir } };
    if ( dir.empty() )
        dir = ".";
    auto files = std::vector< fs::path >{};
    auto ec = std::error_code{};
    for ( const auto& entry : fs::directory_iterator{ dir, ec } )
    {
        if ( entry.is_regular_file() && entry.path().extension() == ".net" )
            files.push_back( entry.path() );
    }
    if ( ec )
        throw Error( ErrorCode::io_error, "cannot list " + dir.string() + ": " + ec.message() );
    std::sort( files.begin(), files.end() );
    for ( const auto& f : files )
    {
        auto ips = attributed( f.string(), []( const std::string& t ) { return parse_netlists( t ); } );
        for ( auto& ip : ips )
        {
            auto name = ip.name;
            if ( !library.emplace( name, std::move( ip ) ).second )
                throw Error( ErrorCode::duplicate_name, "module " + name + " defined twice" ).in_file( f.string() );
        }
    }
    // Elaboration validates modules, connections and widths.
    attributed( design_path, [&]( const std::string& ) { return elaborate( design, library ); } );
    return { std::move( design ), std::move( library ) };
}

FlowInputs load_inputs( const std::string& design_path, const std::string& netlist_dir, const std::string& regmap_path,
                        const std::string& esw_path, const std::string& props_path )
{
    auto in = FlowInputs{};
    std::tie( in.design, in.library ) = load_design( design_path, netlist_dir );
    in.regmap = attributed( regmap_path,
                            [&]( const std::string& t ) { return parse_regmap( t, in.design, in.library ); } );
    in.esw = attributed( esw_path, []( const std::string& t ) { return parse_esw( t ); } );
    if ( !props_path.empty() )
        in.props = attributed( props_path,
                               [&]( const std::string& t ) { return parse_props( t, in.design, in.library ); } );
    return in;
}

Preprocessed phase1_preprocess( const FlowInputs& in, const FlowConfig& cfg )
{
    auto pre = Preprocessed{};
    pre.unique_ips = list_unique_ips( in.design );
    pre.ranked = rank_ips_by_connection( in.design, in.library );
    check_regmap( in.regmap, in.design, in.library );
    pre.regmap = in.regmap;

    auto all_regs = std::vector< std::string >{};
    for ( const auto& e : in.regmap.entries )
        all_regs.push_back( e.reg );
    pre.poi_candidates = set_pois( in.regmap, all_regs, in.esw );

    for ( const auto& d : dangling_addresses( in.esw, in.regmap ) )
        pre.warnings.push_back( "statement " + std::to_string( d.statement + 1 ) + " accesses unmapped address " +
                                hex( d.address ) );

    auto props = in.props;
    auto xprops = generate_xprops( in.design, in.library, cfg.settle );
    props.insert( props.end(), xprops.begin(), xprops.end() );
    check_props( props, in.design, in.library );

    auto names = std::set< std::string >{};
    for ( const auto& p : props )
    {
        if ( !names.insert( p.name ).second )
            throw Error( ErrorCode::duplicate_name, "property " + p.name + " defined twice" );
    }

    auto ranked = std::vector< std::string >{};
    for ( const auto& s : pre.ranked )
        ranked.push_back( s.instance );
    pre.groups = divide_props( props, in.design, ranked );
    return pre;
}

PropertyAst rename_instance( const PropertyAst& prop, const std::string& from, const std::string& to )
{
    auto out = prop;
    auto prefix = from + ".";
    auto fix = [&]( std::string& s ) {
        if ( s.rfind( prefix, 0 ) == 0 )
            s = to + "." + s.substr( prefix.size() );
    };
    auto walk = [&]( auto&& self, Expr& e ) -> void {
        if ( e.op == Expr::Op::signal )
            fix( e.signal );
        for ( auto& a : e.args )
            self( self, a );
    };
    walk( walk, out.expression );
    fix( out.xprop_register );
    if ( out.scope.erase( from ) != 0 )
        out.scope.insert( to );
    return out;
}

VerifReport run_flow( const FlowInputs& inputs, const FlowConfig& config )
{
    auto st = FlowState{ inputs, config };
    st.pre = phase1_preprocess( inputs, config );
    st.report.config = config;
    st.report.warnings = st.pre.warnings;
    st.report.ranking = st.pre.ranked;
    for ( const auto& s : st.pre.ranked )
        st.ranked_names.push_back( s.instance );

    for ( const auto& [mod, rep] : representatives( st ) )
    {
        auto row = ReportRow{};
        row.name = mod;
        row.kind = "ip";
        row.instances = { rep };
        row.total = group( st, mod ).size();
        st.report.rows.push_back( std::move( row ) );
    }
    for ( std::size_t count = 2; count <= st.ranked_names.size(); ++count )
    {
        auto row = ReportRow{};
        row.name = subsystem_name( count - 1 );
        row.kind = "subsystem";
        row.instances = instance_prefix( st, count );
        row.total = group( st, row.name ).size();
        st.report.rows.push_back( std::move( row ) );
    }

    const auto full = elaborate( inputs.design, inputs.library );
    add_sim_warnings( st, full );

    auto stop = [&]( FlowResult r ) {
        st.report.result = r;
        finish( st );
        return st.report;
    };

    if ( config.last_phase < 2 )
        return stop( FlowResult::stopped );

    auto marked = std::vector< std::pair< std::string, std::string > >{};
    phase2( st, marked );
    if ( config.last_phase < 3 )
        return stop( FlowResult::stopped );

    if ( !config.formal_only && !phase3( st, marked, full ) )
        return stop( FlowResult::semiformal_fail );
    if ( config.last_phase < 4 )
        return stop( FlowResult::stopped );

    auto incomplete = phase4( st );
    if ( incomplete == 0 )
    {
        auto ok = config.formal_only ? marked.empty() : true;
        if ( !ok )
            return stop( FlowResult::formal_incomplete );
        return stop( st.used_semiformal ? FlowResult::semiformal_complete : FlowResult::formal_complete );
    }
    if ( config.formal_only )
        return stop( FlowResult::formal_incomplete );
    if ( config.last_phase < 5 )
        return stop( FlowResult::stopped );

    if ( !phase5( st, incomplete, full ) )
        return stop( FlowResult::semiformal_fail );
    return stop( FlowResult::semiformal_complete );
}

std::string_view engine_name( Engine e ) noexcept
{
    return e == Engine::formal ? "formal" : "semiformal";
}

std::string_view row_result_name( RowResult r ) noexcept
{
    switch ( r )
    {
    case RowResult::finished: return "Finished";
    case RowResult::timeout: return "Timeout";
    case RowResult::blackboxed: return "Blackboxed";
    case RowResult::semiformal_fail: return "SemiformalFail";
    case RowResult::skipped: return "Skipped";
    }
    return "?";
}

std::string_view flow_result_name( FlowResult r ) noexcept
{
    switch ( r )
    {
    case FlowResult::formal_complete: return "FORMAL_COMPLETE";
    case FlowResult::semiformal_complete: return "SEMIFORMAL_COMPLETE";
    case FlowResult::semiformal_fail: return "SEMIFORMAL_FAIL";
    case FlowResult::formal_incomplete: return "FORMAL_INCOMPLETE";
    case FlowResult::stopped: return "STOPPED";
    }
    return "?";
}

int exit_code( FlowResult result ) noexcept
{
    switch ( result )
    {
    case FlowResult::semiformal_fail:
    case FlowResult::formal_incomplete: return 2;
    default: return 0;
    }
}

} // namespace hwv
