#include "hwv/bmc.hpp"

#include "hwv/sat.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace hwv
{

std::string_view verdict_name( Verdict v ) noexcept
{
    switch ( v )
    {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::undetermined: return "UNDETERMINED";
    case Verdict::vacuous: return "VACUOUS";
    }
    return "?";
}

std::vector< Constraint > create_stopats( const FlatModel& model, const std::vector< std::string >& registers )
{
    auto out = std::vector< Constraint >{};
    for ( const auto& r : registers )
    {
        if ( model.find_register( r ) == nullptr )
            throw Error( ErrorCode::unknown_register, "stopat on unknown register " + r );
        out.push_back( { Constraint::Kind::stopat, r, {} } );
    }
    return out;
}

std::vector< Constraint > create_assumes( const CapturedValues& values, const std::vector< Constraint >& stopats )
{
    auto out = std::vector< Constraint >{};
    for ( const auto& [reg, bits] : values.values )
    {
        auto cut = std::any_of( stopats.begin(), stopats.end(), [&]( const Constraint& c ) {
            return c.kind == Constraint::Kind::stopat && c.target == reg;
        } );
        if ( !cut )
            throw Error( ErrorCode::missing_stopat, "assume on " + reg + " without a stopat" );
        out.push_back( { Constraint::Kind::assume, reg, bits } );
    }
    return out;
}

std::vector< Constraint > create_blackboxes( const std::vector< std::string >& instances )
{
    auto out = std::vector< Constraint >{};
    for ( const auto& i : instances )
        out.push_back( { Constraint::Kind::blackbox, i, {} } );
    return out;
}

FlatModel apply_blackboxes( const FlatModel& model, const std::vector< Constraint >& constraints )
{
    auto result = model;
    for ( const auto& c : constraints )
    {
        if ( c.kind == Constraint::Kind::blackbox )
            result = blackbox( result, c.target );
    }
    return result;
}

std::string format_trace( const Trace& trace )
{
    auto out = std::ostringstream{};
    out << "# cycles " << trace.length << "\n";
    for ( unsigned c = 0; c < trace.length; ++c )
    {
        for ( const auto& s : trace.signals )
        {
            out << c << " " << s.name << " ";
            const auto& v = s.values[ c ];
            for ( auto it = v.rbegin(); it != v.rend(); ++it )
                out << tri_char( *it );
            out << ( s.forced ? " cut" : "" ) << "\n";
        }
    }
    return out.str();
}

namespace
{

constexpr int lit_true = 1;
constexpr int lit_false = -1;

// Per-net treatment of cut register bits in the dual-rail model.
enum class Cut : std::uint8_t
{
    none,
    free,
    zero,
    one
};

struct GateKey
{
    int kind;
    int a;
    int b;
    int c;
    friend bool operator==( const GateKey&, const GateKey& ) = default;
};

struct GateKeyHash
{
    std::size_t operator()( const GateKey& k ) const noexcept
    {
        auto h = static_cast< std::uint64_t >( k.kind );
        for ( auto x : { k.a, k.b, k.c } )
            h = ( h ^ static_cast< std::uint32_t >( x ) ) * 0x100000001b3ull;
        return static_cast< std::size_t >( h ^ ( h >> 29 ) );
    }
};

/// Time-frame expansion of a binary model into a solver, on demand and with
/// structural hashing and constant propagation.
class Unroller
{
public:
    Unroller( const FlatModel& model, Solver& solver, Cnf& record, std::vector< Cut > cuts,
              std::vector< char > reset_nets, unsigned reset_cycles )
        : model_( model ), solver_( solver ), record_( record ), cuts_( std::move( cuts ) ),
          reset_nets_( std::move( reset_nets ) ), reset_cycles_( reset_cycles )
    {
        auto t = new_var();
        add_clause( { t } );
    }

    int lit( NetId net, unsigned step )
    {
        ensure( step );
        if ( memo_[ step ][ net ] != 0 )
            return memo_[ step ][ net ];
        auto stack = std::vector< std::pair< NetId, unsigned > >{ { net, step } };
        while ( !stack.empty() )
        {
            auto [n, t] = stack.back();
            ensure( t );
            if ( memo_[ t ][ n ] != 0 )
            {
                stack.pop_back();
                continue;
            }
            auto pending = false;
            auto need = [&]( NetId m, unsigned s ) {
                if ( memo_[ s ][ m ] == 0 )
                {
                    stack.emplace_back( m, s );
                    pending = true;
                }
                return memo_[ s ][ m ];
            };

            auto result = 0;
            auto cut = cuts_[ n ];
            if ( cut == Cut::free )
                result = new_var();
            else if ( cut == Cut::zero )
                result = lit_false;
            else if ( cut == Cut::one )
                result = lit_true;
            else if ( model_.is_input( n ) )
                result = reset_nets_[ n ] ? ( t < reset_cycles_ ? lit_true : lit_false ) : new_var();
            else
            {
                auto d = model_.driver( n );
                if ( d == no_node )
                {
                    result = lit_false;
                }
                else
                {
                    const auto& node = model_.nodes()[ d ];
                    switch ( node.kind )
                    {
                    case NodeKind::dff:
                        if ( t == 0 )
                            result = node.value == Tri::one ? lit_true : lit_false;
                        else
                            result = need( node.inputs[ 0 ], t - 1 );
                        break;
                    case NodeKind::constant: result = node.value == Tri::one ? lit_true : lit_false; break;
                    default:
                    {
                        int in[ 3 ] = { 0, 0, 0 };
                        for ( std::size_t k = 0; k < node.inputs.size(); ++k )
                            in[ k ] = need( node.inputs[ k ], t );
                        if ( pending )
                            break;
                        switch ( node.kind )
                        {
                        case NodeKind::and_gate: result = and_( in[ 0 ], in[ 1 ] ); break;
                        case NodeKind::or_gate: result = -and_( -in[ 0 ], -in[ 1 ] ); break;
                        case NodeKind::xor_gate: result = xor_( in[ 0 ], in[ 1 ] ); break;
                        case NodeKind::not_gate: result = -in[ 0 ]; break;
                        case NodeKind::mux: result = mux( in[ 0 ], in[ 1 ], in[ 2 ] ); break;
                        default: break;
                        }
                    }
                    }
                }
            }
            if ( pending )
                continue;
            memo_[ t ][ n ] = result;
            stack.pop_back();
        }
        return memo_[ step ][ net ];
    }

    /// Literal already assigned to (net, step), or 0.
    int peek( NetId net, unsigned step ) const
    {
        return step < memo_.size() ? memo_[ step ][ net ] : 0;
    }

    int and_( int a, int b )
    {
        if ( a == lit_false || b == lit_false || a == -b )
            return lit_false;
        if ( a == lit_true || a == b )
            return b;
        if ( b == lit_true )
            return a;
        if ( a > b )
            std::swap( a, b );
        auto key = GateKey{ 0, a, b, 0 };
        if ( auto it = strash_.find( key ); it != strash_.end() )
            return it->second;
        auto x = new_var();
        add_clause( { -x, a } );
        add_clause( { -x, b } );
        add_clause( { x, -a, -b } );
        strash_.emplace( key, x );
        return x;
    }

    int or_( int a, int b ) { return -and_( -a, -b ); }

    int xor_( int a, int b )
    {
        auto flip = false;
        if ( a < 0 )
        {
            a = -a;
            flip = !flip;
        }
        if ( b < 0 )
        {
            b = -b;
            flip = !flip;
        }
        auto result = 0;
        if ( a == b )
            result = lit_false;
        else if ( a == lit_true )
            result = -b;
        else if ( b == lit_true )
            result = -a;
        else
        {
            if ( a > b )
                std::swap( a, b );
            auto key = GateKey{ 1, a, b, 0 };
            if ( auto it = strash_.find( key ); it != strash_.end() )
            {
                result = it->second;
            }
            else
            {
                auto x = new_var();
                add_clause( { -x, a, b } );
                add_clause( { -x, -a, -b } );
                add_clause( { x, -a, b } );
                add_clause( { x, a, -b } );
                strash_.emplace( key, x );
                result = x;
            }
        }
        return flip ? -result : result;
    }

    // s ? b : a
    int mux( int s, int a, int b )
    {
        if ( s == lit_true )
            return b;
        if ( s == lit_false || a == b )
            return a;
        if ( s < 0 )
        {
            s = -s;
            std::swap( a, b );
        }
        if ( a == -b )
            return xor_( s, a );
        if ( a == lit_false )
            return and_( s, b );
        if ( a == lit_true )
            return or_( -s, b );
        if ( b == lit_false )
            return and_( -s, a );
        if ( b == lit_true )
            return or_( s, a );
        if ( s == a || s == -a || s == b || s == -b )
            return or_( and_( s, b ), and_( -s, a ) );
        auto key = GateKey{ 2, s, a, b };
        if ( auto it = strash_.find( key ); it != strash_.end() )
            return it->second;
        auto x = new_var();
        add_clause( { -s, -b, x } );
        add_clause( { -s, b, -x } );
        add_clause( { s, -a, x } );
        add_clause( { s, a, -x } );
        add_clause( { -a, -b, x } );
        add_clause( { a, b, -x } );
        strash_.emplace( key, x );
        return x;
    }

    void add_clause( std::initializer_list< int > lits )
    {
        record_.clauses.emplace_back( lits );
        solver_.add_clause( lits );
    }

    void add_unit( int lit )
    {
        record_.clauses.push_back( { lit } );
        solver_.add_clause( { lit } );
    }

private:
    int new_var()
    {
        auto v = solver_.new_var();
        record_.num_vars = std::max( record_.num_vars, v );
        return v;
    }

    void ensure( unsigned step )
    {
        while ( memo_.size() <= step )
            memo_.emplace_back( model_.net_count(), 0 );
    }

    const FlatModel& model_;
    Solver& solver_;
    Cnf& record_;
    std::vector< Cut > cuts_;
    std::vector< char > reset_nets_;
    unsigned reset_cycles_;
    std::vector< std::vector< int > > memo_;
    std::unordered_map< GateKey, int, GateKeyHash > strash_;
};

bool model_value( const std::vector< bool >& model, int lit )
{
    if ( lit == 0 )
        return false;
    auto v = static_cast< std::size_t >( std::abs( lit ) );
    auto b = v < model.size() && model[ v ];
    return lit > 0 ? b : !b;
}

struct Shared
{
    const FlatModel* base = nullptr;
    const MonitoredModel* monitored = nullptr;
    const DualRailModel* dual = nullptr;
    std::vector< Cut > cuts;
    std::vector< char > reset_nets;
    std::vector< const FlatRegister* > cut_registers;
    BmcOptions options;
};

class Task
{
public:
    Task( const Shared& shared, const Monitor& monitor ) : shared_( shared ), monitor_( monitor )
    {
        outcome_.name = monitor.name;
    }

    bool done() const noexcept { return done_; }
    PropertyOutcome& outcome() noexcept { return outcome_; }
    const Cnf& cnf() const noexcept { return record_; }
    const std::vector< std::pair< unsigned, int > >& queries() const noexcept { return queries_; }

    void finish_undetermined( std::string reason )
    {
        outcome_.verdict = Verdict::undetermined;
        outcome_.reason = std::move( reason );
        done_ = true;
    }

    void run( Clock::time_point deadline )
    {
        auto start = Clock::now();
        if ( !solver_ )
        {
            solver_ = std::make_unique< Solver >( shared_.options.seed );
            unroller_ = std::make_unique< Unroller >( shared_.dual->model, *solver_, record_, shared_.cuts,
                                                      shared_.reset_nets, shared_.options.reset_cycles );
        }
        const auto bound = shared_.options.bound;
        while ( next_step_ < bound )
        {
            auto t = next_step_;
            auto viol = violation( t );
            if ( viol == lit_false )
            {
                ++next_step_;
                continue;
            }
            if ( Clock::now() >= deadline )
                break;
            queries_.emplace_back( t, viol );
            auto status = SolveStatus::timeout;
            auto model = std::vector< bool >{};
            if ( shared_.options.external_solver.empty() )
            {
                int assumption[ 1 ] = { viol };
                status = solver_->solve( assumption, deadline );
                if ( status == SolveStatus::sat )
                    model = solver_->model();
            }
            else
            {
                int assumption[ 1 ] = { viol };
                auto remaining = std::chrono::duration< double >( deadline - Clock::now() ).count();
                auto ext = solve_external( record_, assumption, shared_.options.external_solver, std::max( remaining, 0.001 ) );
                status = ext.status;
                model = std::move( ext.model );
            }
            if ( status == SolveStatus::timeout )
                break;
            if ( status == SolveStatus::sat )
            {
                outcome_.verdict = Verdict::fail;
                outcome_.cycle = t;
                outcome_.trace = extract_trace( model, t );
                done_ = true;
                break;
            }
            unroller_->add_unit( -viol );
            ++next_step_;
        }
        if ( !done_ && next_step_ >= bound )
        {
            outcome_.verdict = Verdict::pass;
            outcome_.cycle = bound;
            done_ = true;
        }
        if ( !done_ )
        {
            outcome_.verdict = Verdict::undetermined;
            outcome_.reason = "timeout";
        }
        outcome_.elapsed += std::chrono::duration< double >( Clock::now() - start ).count();
    }

private:
    int violation( unsigned t )
    {
        const auto& dual = *shared_.dual;
        if ( monitor_.kind == PropertyKind::user )
        {
            auto k = unroller_->lit( dual.known[ monitor_.net ], t );
            auto v = unroller_->lit( dual.value[ monitor_.net ], t );
            return unroller_->and_( k, -v );
        }
        if ( t < monitor_.first_cycle )
            return lit_false;
        auto any = lit_false;
        for ( auto bit : monitor_.watched )
            any = unroller_->or_( any, -unroller_->lit( dual.known[ bit ], t ) );
        return any;
    }

    Tri tri_at( const std::vector< bool >& model, NetId net, unsigned t ) const
    {
        const auto& dual = *shared_.dual;
        auto k = unroller_->peek( dual.known[ net ], t );
        auto v = unroller_->peek( dual.value[ net ], t );
        if ( !model_value( model, k ) )
            return Tri::x;
        return tri_of( model_value( model, v ) );
    }

    Trace extract_trace( const std::vector< bool >& model, unsigned fail )
    {
        auto trace = Trace{};
        trace.length = fail + 1;
        const auto& base = *shared_.base;
        for ( const auto& port : base.inputs() )
        {
            auto s = Trace::Signal{ port.name, port.bits, false, {} };
            for ( unsigned t = 0; t <= fail; ++t )
            {
                auto values = std::vector< Tri >{};
                for ( auto bit : port.bits )
                {
                    auto lit = unroller_->peek( shared_.dual->value[ bit ], t );
                    values.push_back( tri_of( model_value( model, lit ) ) );
                }
                s.values.push_back( std::move( values ) );
            }
            trace.signals.push_back( std::move( s ) );
        }
        for ( const auto* reg : shared_.cut_registers )
        {
            auto s = Trace::Signal{ reg->name, reg->bits, true, {} };
            for ( unsigned t = 0; t <= fail; ++t )
            {
                auto values = std::vector< Tri >{};
                for ( auto bit : reg->bits )
                {
                    // Bits outside the cone were never encoded; any value works.
                    auto k = unroller_->peek( shared_.dual->known[ bit ], t );
                    values.push_back( k == 0 ? Tri::zero : tri_at( model, bit, t ) );
                }
                s.values.push_back( std::move( values ) );
            }
            trace.signals.push_back( std::move( s ) );
        }
        return trace;
    }

    const Shared& shared_;
    const Monitor& monitor_;
    PropertyOutcome outcome_;
    std::unique_ptr< Solver > solver_;
    Cnf record_;
    std::unique_ptr< Unroller > unroller_;
    unsigned next_step_ = 0;
    bool done_ = false;
    std::vector< std::pair< unsigned, int > > queries_;
};

std::string sanitize( const std::string& name )
{
    auto out = name;
    for ( auto& c : out )
    {
        if ( !std::isalnum( static_cast< unsigned char >( c ) ) && c != '_' && c != '-' && c != '.' )
            c = '_';
    }
    return out;
}

void run_round( std::vector< Task* >& tasks, double share, unsigned jobs )
{
    auto slice = std::chrono::duration_cast< Clock::duration >( std::chrono::duration< double >( share ) );
    if ( jobs <= 1 || tasks.size() <= 1 )
    {
        for ( auto* task : tasks )
            task->run( Clock::now() + slice );
        return;
    }
    auto next = std::atomic< std::size_t >{ 0 };
    auto workers = std::vector< std::thread >{};
    for ( unsigned j = 0; j < std::min< std::size_t >( jobs, tasks.size() ); ++j )
    {
        workers.emplace_back( [&] {
            for ( auto i = next++; i < tasks.size(); i = next++ )
                tasks[ i ]->run( Clock::now() + slice );
        } );
    }
    for ( auto& w : workers )
        w.join();
}

} // namespace

BmcStatus check( const BmcRun& run )
{
    auto start = Clock::now();
    if ( run.model == nullptr )
        throw Error( ErrorCode::io_error, "BMC run without a model" );
    const auto& opt = run.options;
    if ( opt.bound == 0 )
        throw Error( ErrorCode::syntax_error, "bound must be at least 1" );

    auto status = BmcStatus{};
    auto base = std::make_shared< const FlatModel >( apply_blackboxes( *run.model, run.constraints ) );
    status.checked_model = base;

    auto active = std::vector< PropertyAst >{};
    for ( const auto& p : run.properties )
    {
        auto vacuous = false;
        for ( const auto& inst : p.scope )
        {
            auto idx = base->find_instance( inst );
            if ( !idx )
                throw Error( ErrorCode::unresolvable_scope, "property " + p.name + " references instance " + inst +
                                                                " outside the model" );
            vacuous = vacuous || base->instances()[ *idx ].blackboxed;
        }
        if ( vacuous )
        {
            auto o = PropertyOutcome{};
            o.name = p.name;
            o.verdict = Verdict::vacuous;
            status.outcomes.push_back( std::move( o ) );
        }
        else
        {
            active.push_back( p );
        }
    }

    auto monitored = compile_properties( *base, active, opt.reset_cycles );
    auto dual = xprop_encode( monitored.model );

    auto shared = Shared{};
    shared.base = base.get();
    shared.monitored = &monitored;
    shared.dual = &dual;
    shared.options = opt;
    shared.cuts.assign( dual.model.net_count(), Cut::none );
    shared.reset_nets.assign( dual.model.net_count(), 0 );
    for ( auto net : monitored.model.reset_inputs() )
        shared.reset_nets[ dual.value[ net ] ] = 1;

    for ( const auto& c : run.constraints )
    {
        if ( c.kind != Constraint::Kind::stopat )
            continue;
        const auto* reg = base->find_register( c.target );
        if ( reg == nullptr )
            throw Error( ErrorCode::unknown_register, "stopat on unknown register " + c.target );
        if ( std::find( shared.cut_registers.begin(), shared.cut_registers.end(), reg ) == shared.cut_registers.end() )
            shared.cut_registers.push_back( reg );
        for ( auto bit : reg->bits )
        {
            shared.cuts[ dual.value[ bit ] ] = Cut::free;
            shared.cuts[ dual.known[ bit ] ] = Cut::free;
        }
    }
    for ( const auto& c : run.constraints )
    {
        if ( c.kind != Constraint::Kind::assume )
            continue;
        const auto* reg = base->find_register( c.target );
        auto cut = std::find( shared.cut_registers.begin(), shared.cut_registers.end(), reg ) != shared.cut_registers.end();
        if ( reg == nullptr || !cut )
            throw Error( ErrorCode::missing_stopat, "assume on " + c.target + " without a stopat" );
        if ( c.value.size() != reg->bits.size() )
            throw Error( ErrorCode::width_mismatch, "assume value for " + c.target + " has the wrong width" );
        for ( std::size_t b = 0; b < reg->bits.size(); ++b )
        {
            shared.cuts[ dual.value[ reg->bits[ b ] ] ] = c.value[ b ] ? Cut::one : Cut::zero;
            shared.cuts[ dual.known[ reg->bits[ b ] ] ] = Cut::one;
        }
    }

    auto tasks = std::vector< std::unique_ptr< Task > >{};
    for ( const auto& m : monitored.monitors )
    {
        tasks.push_back( std::make_unique< Task >( shared, m ) );
        if ( m.kind == PropertyKind::xprop && m.first_cycle >= opt.bound )
            tasks.back()->finish_undetermined( "bound" );
    }

    // Equal shares first, then the leftover split among unfinished tasks.
    auto used = 0.0;
    for ( ;; )
    {
        auto pending = std::vector< Task* >{};
        for ( auto& t : tasks )
        {
            if ( !t->done() )
                pending.push_back( t.get() );
        }
        auto remaining = opt.budget - used;
        if ( pending.empty() || remaining < 1e-3 )
            break;
        auto before = std::vector< double >{};
        for ( auto* t : pending )
            before.push_back( t->outcome().elapsed );
        run_round( pending, remaining / static_cast< double >( pending.size() ), opt.jobs );
        for ( std::size_t i = 0; i < pending.size(); ++i )
            used += pending[ i ]->outcome().elapsed - before[ i ];
    }

    for ( auto& t : tasks )
    {
        auto& o = t->outcome();
        if ( !opt.dump_cnf_dir.empty() )
        {
            std::filesystem::create_directories( opt.dump_cnf_dir );
            auto file = std::ofstream{ std::filesystem::path{ opt.dump_cnf_dir } / ( sanitize( o.name ) + ".cnf" ) };
            file << "c property " << o.name << "\n";
            for ( const auto& [step, lit] : t->queries() )
                file << "c step " << step << " violation literal " << lit << "\n";
            file << export_dimacs( t->cnf() );
        }
        if ( !opt.dump_trace_dir.empty() && o.trace )
        {
            std::filesystem::create_directories( opt.dump_trace_dir );
            auto file = std::ofstream{ std::filesystem::path{ opt.dump_trace_dir } / ( sanitize( o.name ) + ".trace" ) };
            file << "# property " << o.name << " violated at cycle " << o.cycle << "\n" << format_trace( *o.trace );
        }
        status.outcomes.push_back( std::move( o ) );
    }
    std::sort( status.outcomes.begin(), status.outcomes.end(),
               []( const auto& a, const auto& b ) { return a.name < b.name; } );
    status.complete = std::none_of( status.outcomes.begin(), status.outcomes.end(),
                                    []( const auto& o ) { return o.verdict == Verdict::undetermined; } );
    status.elapsed = std::chrono::duration< double >( Clock::now() - start ).count();
    return status;
}

bool replay( const FlatModel& model, const PropertyAst& property, const Trace& trace, unsigned reset_cycles )
{
    if ( trace.length == 0 )
        return false;
    auto monitored = compile_properties( model, { property }, reset_cycles );
    const auto& m = monitored.model;
    auto values = initial_values( m );
    for ( unsigned c = 0; c < trace.length; ++c )
    {
        for ( const auto& s : trace.signals )
        {
            for ( std::size_t b = 0; b < s.bits.size(); ++b )
                values.at( s.bits[ b ] ) = s.values.at( c ).at( b );
        }
        evaluate( m, values );
        if ( c + 1 == trace.length )
            return violated( monitored.monitors.front(), values, c );
        clock( m, values );
    }
    return false;
}

} // namespace hwv
