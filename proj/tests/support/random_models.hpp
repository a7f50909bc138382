#pragma once

#include "hwv/frontend.hpp"
#include "hwv/netlist.hpp"

#include <random>
#include <string>
#include <vector>

namespace gen
{

struct ModelShape
{
    unsigned max_registers = 4;
    unsigned max_register_width = 4;
    unsigned max_state_bits = 14;
    unsigned input_bits = 3;
    unsigned gates = 20;
    unsigned outputs = 3;
    /// Chance that a DFF gets an enable / a reset.
    double enable_rate = 0.3;
    double reset_rate = 0.4;
    unsigned properties = 4;
};

/// One random module wrapped in a single-instance design ("rnd" as "m").
struct RandomCase
{
    std::string netlist;
    hwv::Design design;
    hwv::Library library;
    hwv::FlatModel model;
    std::vector< std::string > registers;
    std::vector< hwv::PropertyAst > props;
};

RandomCase random_case( std::mt19937_64& rng, const ModelShape& shape = {} );

/// Random netlist text whose combinational part is a DAG of at most
/// `max_nodes` gates over a few registers and inputs.
std::string random_dag_netlist( std::mt19937_64& rng, unsigned max_nodes );

/// Wraps a single module into a one-instance design and elaborates it.
RandomCase wrap( const std::string& netlist_text, const std::string& instance = "m" );

} // namespace gen
