#pragma once

#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hwv
{

struct SraWeights
{
    std::uint64_t path = 100;
    std::uint64_t element = 1;
};

struct CorScore
{
    std::string reg;
    std::uint64_t paths = 0;
    std::uint64_t elements = 0;
    std::uint64_t score = 0;

    friend bool operator==( const CorScore&, const CorScore& ) = default;
};

/// Cone-of-relevance score of a register.
///
/// Paths run from the register's bits through combinational logic and end at
/// a primary output or at a DFF pin of another register; they are counted
/// by dynamic programming over that DAG. Elements are the unique nodes of the
/// fanout cone, crossing DFF boundaries; combinational nodes that only feed
/// the register's own DFFs are left out. With `multiplicity` set, nodes of
/// the first combinational layer are counted once per path through them.
/// Counts saturate at the largest uint64.
CorScore cor( const FlatModel& model, std::string_view reg, const SraWeights& weights = {}, bool multiplicity = false );

/// Mapped registers present in the model, by descending score, ties by name.
std::vector< CorScore > do_sra( const FlatModel& model, const RegisterMap& mapped, const SraWeights& weights = {},
                                bool multiplicity = false );

/// The n highest-ranked registers; ExhaustedRegisters unless 1 <= n <= size.
std::vector< std::string > combine_regs( const std::vector< CorScore >& ranked, std::size_t n );

} // namespace hwv
