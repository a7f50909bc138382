#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hwv
{

/// Clauses over DIMACS literals: variable v is `v`, its negation `-v`.
struct Cnf
{
    int num_vars = 0;
    std::vector< std::vector< int > > clauses;

    friend bool operator==( const Cnf&, const Cnf& ) = default;
};

enum class SolveStatus
{
    sat,
    unsat,
    timeout
};

std::string_view solve_status_name( SolveStatus s ) noexcept;

struct SolveOutcome
{
    SolveStatus status = SolveStatus::timeout;
    /// Index 0 unused; model[v] is the value of variable v (SAT only).
    std::vector< bool > model;
    double elapsed = 0.0;
};

using Clock = std::chrono::steady_clock;

bool satisfies( const Cnf& cnf, const std::vector< bool >& model );

/// Incremental CDCL solver: two watched literals, VSIDS, first-UIP learning,
/// Luby restarts, phase saving, activity-based clause deletion. Clauses may be
/// added between solve calls; assumptions hold for a single call.
class Solver
{
public:
    explicit Solver( std::uint64_t seed = 1 );
    ~Solver();
    Solver( const Solver& ) = delete;
    Solver& operator=( const Solver& ) = delete;

    int new_var();
    int num_vars() const noexcept;
    /// Returns false once the clause set is unsatisfiable at the top level.
    bool add_clause( std::span< const int > lits );
    bool add_clause( std::initializer_list< int > lits ) { return add_clause( std::span{ lits.begin(), lits.size() } ); }

    SolveStatus solve( std::span< const int > assumptions = {}, std::optional< Clock::time_point > deadline = {} );

    /// Model value after SAT.
    bool value( int var ) const;
    std::vector< bool > model() const;

    std::uint64_t conflicts() const noexcept;
    std::uint64_t decisions() const noexcept;

private:
    struct Impl;
    std::unique_ptr< Impl > impl_;
};

/// One-shot solve with a wall-clock budget in seconds.
SolveOutcome solve( const Cnf& cnf, std::span< const int > assumptions = {}, double budget = 1e9, std::uint64_t seed = 1 );

std::string export_dimacs( const Cnf& cnf );
/// Throws Error(SyntaxError) with a line number on malformed input.
Cnf import_dimacs( std::string_view text );

/// Runs `command <file.cnf>` on the CNF (assumptions become unit clauses)
/// and parses the competition output format ("s SATISFIABLE", "v" lines).
/// A SAT answer whose model does not satisfy the CNF is reported as a
/// timeout (unusable result).
SolveOutcome solve_external( const Cnf& cnf, std::span< const int > assumptions, const std::string& command,
                             double budget );

} // namespace hwv
