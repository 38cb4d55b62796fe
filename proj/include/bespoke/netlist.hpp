/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file netlist.hpp
  \brief Gate-level netlist: representation, simulation, area and activity

  A netlist is a flat node array in topological order: primary-input bits
  first, then gates whose fanins always point at lower ids. Each node drives
  exactly one net, identified by the node id. Simulation is 64-way
  bit-parallel: one machine word carries one node's value across 64
  consecutive stimulus patterns.
*/

#pragma once

#include <array>
#include <bit>
#include <cassert>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace bespoke
{

enum class gate_op : uint8_t
{
  pi, /* primary-input bit, not a gate */
  const0,
  const1,
  inv,
  and2,
  or2,
  nand2,
  nor2,
  xor2,
  xnor2,
  mux2 /* fanin (sel, d0, d1): sel ? d1 : d0 */
};

inline int fanin_count( gate_op op )
{
  switch ( op )
  {
  case gate_op::pi:
  case gate_op::const0:
  case gate_op::const1:
    return 0;
  case gate_op::inv:
    return 1;
  case gate_op::mux2:
    return 3;
  default:
    return 2;
  }
}

inline bool is_logic_gate( gate_op op )
{
  return op != gate_op::pi && op != gate_op::const0 && op != gate_op::const1;
}

/*! \brief Area weight in gate equivalents (NAND2-normalized). */
inline double gate_area_weight( gate_op op )
{
  switch ( op )
  {
  case gate_op::inv:
    return 0.5;
  case gate_op::and2:
  case gate_op::or2:
  case gate_op::nand2:
  case gate_op::nor2:
    return 1.0;
  case gate_op::xor2:
  case gate_op::xnor2:
  case gate_op::mux2:
    return 2.0;
  default:
    return 0.0; /* pi, const0, const1 */
  }
}

inline std::string to_string( gate_op op )
{
  switch ( op )
  {
  case gate_op::pi:
    return "pi";
  case gate_op::const0:
    return "const0";
  case gate_op::const1:
    return "const1";
  case gate_op::inv:
    return "not";
  case gate_op::and2:
    return "and2";
  case gate_op::or2:
    return "or2";
  case gate_op::nand2:
    return "nand2";
  case gate_op::nor2:
    return "nor2";
  case gate_op::xor2:
    return "xor2";
  case gate_op::xnor2:
    return "xnor2";
  default:
    return "mux2";
  }
}

struct gate
{
  gate_op op = gate_op::const0;
  std::array<uint32_t, 3> fanin{ 0, 0, 0 };

  bool operator==( gate const& other ) const = default;
};

/*! \brief Named bit-vector port; bits are node ids, least significant first. */
struct port
{
  std::string name;
  std::vector<uint32_t> bits;
  bool is_signed = false;

  bool operator==( port const& other ) const = default;
};

struct netlist
{
  std::string name = "top";
  std::vector<gate> nodes; /* ids [0, num_pis) are pi nodes */
  uint32_t num_pis = 0;
  std::vector<port> inputs;
  std::vector<port> outputs;

  size_t size() const { return nodes.size(); }
  bool operator==( netlist const& other ) const = default;
};

/*! \brief Count of logic gates (constants and inputs excluded). */
inline size_t logic_gate_count( netlist const& n )
{
  size_t count = 0;
  for ( auto const& g : n.nodes )
  {
    if ( is_logic_gate( g.op ) )
      ++count;
  }
  return count;
}

/*! \brief Structural invariants: pi prefix, in-order fanins (hence acyclic
 * and topologically ordered), ports referencing existing nodes.
 */
inline void validate( netlist const& n )
{
  if ( n.num_pis > n.nodes.size() )
    throw validation_error( n.name, "num_pis exceeds node count" );
  for ( size_t i = 0; i < n.nodes.size(); ++i )
  {
    auto const& g = n.nodes[i];
    if ( i < n.num_pis )
    {
      if ( g.op != gate_op::pi )
        throw validation_error( n.name, "node " + std::to_string( i ) + " inside the pi prefix is not a pi" );
      continue;
    }
    if ( g.op == gate_op::pi )
      throw validation_error( n.name, "pi node " + std::to_string( i ) + " outside the pi prefix" );
    for ( int k = 0; k < fanin_count( g.op ); ++k )
    {
      if ( g.fanin[static_cast<size_t>( k )] >= i )
        throw validation_error( n.name, "node " + std::to_string( i ) + " reads a later or self net" );
    }
  }
  std::vector<int> covered( n.num_pis, 0 );
  for ( auto const& p : n.inputs )
  {
    if ( p.bits.empty() )
      throw validation_error( n.name, "input port '" + p.name + "' is empty" );
    for ( uint32_t b : p.bits )
    {
      if ( b >= n.num_pis )
        throw validation_error( n.name, "input port '" + p.name + "' references a non-pi node" );
      ++covered[b];
    }
  }
  for ( size_t i = 0; i < covered.size(); ++i )
  {
    if ( covered[i] != 1 )
      throw validation_error( n.name, "pi node " + std::to_string( i ) + " must feed exactly one input bit" );
  }
  for ( auto const& p : n.outputs )
  {
    if ( p.bits.empty() )
      throw validation_error( n.name, "output port '" + p.name + "' is empty" );
    for ( uint32_t b : p.bits )
    {
      if ( b >= n.nodes.size() )
        throw validation_error( n.name, "output port '" + p.name + "' references a missing node" );
    }
  }
}

struct area_report
{
  double gate_equivalents = 0.0;
  std::vector<double> per_node_weight; /* indexed by node id */

  /*! \brief The cost table used, indexed by gate_op. */
  static std::array<double, 11> weight_table()
  {
    std::array<double, 11> t{};
    for ( size_t op = 0; op < t.size(); ++op )
      t[op] = gate_area_weight( static_cast<gate_op>( op ) );
    return t;
  }
};

inline area_report area( netlist const& n )
{
  area_report r;
  r.per_node_weight.reserve( n.nodes.size() );
  for ( auto const& g : n.nodes )
  {
    const double w = gate_area_weight( g.op );
    r.per_node_weight.push_back( w );
    r.gate_equivalents += w;
  }
  return r;
}

/*! \brief Forced node values for what-if evaluation: one entry per node,
 * -1 leaves the node alone, 0/1 pin its output.
 */
using force_map = std::vector<int8_t>;

namespace detail
{

/*! \brief Evaluates all gates for one 64-pattern block. `values` holds one
 * word per node with the pi words already filled.
 */
inline void eval_block( netlist const& n, std::vector<uint64_t>& values, force_map const* force )
{
  for ( size_t i = n.num_pis; i < n.nodes.size(); ++i )
  {
    auto const& g = n.nodes[i];
    uint64_t v = 0;
    const uint64_t a = values[g.fanin[0]];
    switch ( g.op )
    {
    case gate_op::const0:
      v = 0;
      break;
    case gate_op::const1:
      v = ~uint64_t{ 0 };
      break;
    case gate_op::inv:
      v = ~a;
      break;
    case gate_op::and2:
      v = a & values[g.fanin[1]];
      break;
    case gate_op::or2:
      v = a | values[g.fanin[1]];
      break;
    case gate_op::nand2:
      v = ~( a & values[g.fanin[1]] );
      break;
    case gate_op::nor2:
      v = ~( a | values[g.fanin[1]] );
      break;
    case gate_op::xor2:
      v = a ^ values[g.fanin[1]];
      break;
    case gate_op::xnor2:
      v = ~( a ^ values[g.fanin[1]] );
      break;
    case gate_op::mux2:
      v = ( a & values[g.fanin[2]] ) | ( ~a & values[g.fanin[1]] );
      break;
    default:
      break; /* pi: unreachable past the prefix */
    }
    if ( force && ( *force )[i] >= 0 )
      v = ( *force )[i] ? ~uint64_t{ 0 } : 0;
    values[i] = v;
  }
}

inline void fill_pi_block( netlist const& n, std::vector<std::vector<int64_t>> const& rows, size_t first_row,
                           size_t row_count, std::vector<uint64_t>& values )
{
  for ( uint32_t b = 0; b < n.num_pis; ++b )
    values[b] = 0;
  for ( size_t p = 0; p < n.inputs.size(); ++p )
  {
    auto const& bits = n.inputs[p].bits;
    for ( size_t lane = 0; lane < row_count; ++lane )
    {
      const int64_t code = rows[first_row + lane][p];
      for ( size_t b = 0; b < bits.size(); ++b )
        values[bits[b]] |= static_cast<uint64_t>( ( code >> b ) & 1 ) << lane;
    }
  }
}

inline int64_t extract_port( port const& p, std::vector<uint64_t> const& values, size_t lane )
{
  int64_t code = 0;
  for ( size_t b = 0; b < p.bits.size(); ++b )
    code |= static_cast<int64_t>( ( values[p.bits[b]] >> lane ) & 1 ) << b;
  if ( p.is_signed && !p.bits.empty() && ( code >> ( p.bits.size() - 1 ) & 1 ) )
    code -= int64_t{ 1 } << p.bits.size();
  return code;
}

/*! \brief Runs `body(block_index)` over blocks [0, num_blocks) on `threads`
 * workers; block work must be independent.
 */
template<typename Fn>
inline void for_each_block( size_t num_blocks, unsigned threads, Fn&& body )
{
  if ( threads <= 1 || num_blocks <= 1 )
  {
    for ( size_t blk = 0; blk < num_blocks; ++blk )
      body( blk );
    return;
  }
  const unsigned workers = static_cast<unsigned>( std::min<size_t>( threads, num_blocks ) );
  std::vector<std::thread> pool;
  pool.reserve( workers );
  for ( unsigned t = 0; t < workers; ++t )
  {
    pool.emplace_back( [&, t]() {
      for ( size_t blk = t; blk < num_blocks; blk += workers )
        body( blk );
    } );
  }
  for ( auto& th : pool )
    th.join();
}

} // namespace detail

/*! \brief Simulates every stimulus row; `rows[r][p]` is the code driven
 * into input port p. Returns one code per output port per row. The result
 * is independent of `threads`.
 */
inline std::vector<std::vector<int64_t>> simulate( netlist const& n, std::vector<std::vector<int64_t>> const& rows,
                                                   unsigned threads = 1, force_map const* force = nullptr )
{
  for ( size_t r = 0; r < rows.size(); ++r )
  {
    if ( rows[r].size() != n.inputs.size() )
      throw simulation_error( n.name + ": row " + std::to_string( r ) + " drives " + std::to_string( rows[r].size() ) +
                              " ports, expected " + std::to_string( n.inputs.size() ) );
  }
  std::vector<std::vector<int64_t>> out( rows.size(), std::vector<int64_t>( n.outputs.size(), 0 ) );
  const size_t num_blocks = ( rows.size() + 63 ) / 64;

  detail::for_each_block( num_blocks, threads, [&]( size_t blk ) {
    const size_t first = blk * 64;
    const size_t count = std::min<size_t>( 64, rows.size() - first );
    std::vector<uint64_t> values( n.nodes.size(), 0 );
    detail::fill_pi_block( n, rows, first, count, values );
    detail::eval_block( n, values, force );
    for ( size_t lane = 0; lane < count; ++lane )
    {
      for ( size_t p = 0; p < n.outputs.size(); ++p )
        out[first + lane][p] = detail::extract_port( n.outputs[p], values, lane );
    }
  } );
  return out;
}

/*! \brief Single-row convenience wrapper. */
inline std::vector<int64_t> simulate_row( netlist const& n, std::vector<int64_t> const& row )
{
  const std::vector<std::vector<int64_t>> rows{ row };
  return simulate( n, rows ).front();
}

/*! \brief Per-node switching profile over a stimulus sequence.
 *
 * toggle_rate is the fraction of consecutive row pairs, in the given order,
 * on which the node's value flips. stuck_value is engaged exactly when the
 * node held one value over the whole sequence.
 */
struct activity_profile
{
  std::vector<double> toggle_rate;
  std::vector<std::optional<bool>> stuck_value;
  std::vector<double> one_fraction; /* share of rows on which the node is 1 */
  size_t num_rows = 0;
};

inline activity_profile profile_activity( netlist const& n, std::vector<std::vector<int64_t>> const& rows,
                                          unsigned threads = 1, force_map const* force = nullptr )
{
  if ( rows.empty() )
    throw simulation_error( n.name + ": activity profiling needs a nonempty stimulus" );

  struct block_stat
  {
    std::vector<uint64_t> toggles;
    std::vector<uint64_t> ones;
    std::vector<uint8_t> first; /* per node: value on the block's first row */
    std::vector<uint8_t> last;
    std::vector<uint8_t> varied;
  };

  const size_t num_blocks = ( rows.size() + 63 ) / 64;
  std::vector<block_stat> stats( num_blocks );

  detail::for_each_block( num_blocks, threads, [&]( size_t blk ) {
    const size_t first_row = blk * 64;
    const size_t count = std::min<size_t>( 64, rows.size() - first_row );
    std::vector<uint64_t> values( n.nodes.size(), 0 );
    detail::fill_pi_block( n, rows, first_row, count, values );
    detail::eval_block( n, values, force );

    auto& s = stats[blk];
    const size_t num = n.nodes.size();
    s.toggles.resize( num );
    s.ones.resize( num );
    s.first.resize( num );
    s.last.resize( num );
    s.varied.resize( num );
    const uint64_t lane_mask = count == 64 ? ~uint64_t{ 0 } : ( ( uint64_t{ 1 } << count ) - 1 );
    const uint64_t pair_mask = count < 2 ? 0 : ( lane_mask >> 1 );
    for ( size_t i = 0; i < num; ++i )
    {
      const uint64_t v = values[i] & lane_mask;
      s.toggles[i] = static_cast<uint64_t>( std::popcount( ( v ^ ( v >> 1 ) ) & pair_mask ) );
      s.ones[i] = static_cast<uint64_t>( std::popcount( v ) );
      s.first[i] = static_cast<uint8_t>( v & 1 );
      s.last[i] = static_cast<uint8_t>( ( v >> ( count - 1 ) ) & 1 );
      s.varied[i] = static_cast<uint8_t>( v != 0 && v != lane_mask );
    }
  } );

  /* merge block stats in row order; the result is partition-independent */
  activity_profile prof;
  prof.num_rows = rows.size();
  const size_t num = n.nodes.size();
  std::vector<uint64_t> toggles( num, 0 );
  std::vector<uint64_t> ones( num, 0 );
  std::vector<uint8_t> varied( num, 0 );
  for ( size_t blk = 0; blk < num_blocks; ++blk )
  {
    auto const& s = stats[blk];
    for ( size_t i = 0; i < num; ++i )
    {
      toggles[i] += s.toggles[i];
      ones[i] += s.ones[i];
      if ( blk > 0 && stats[blk - 1].last[i] != s.first[i] )
        ++toggles[i];
      varied[i] |= s.varied[i];
      if ( blk > 0 && stats[blk - 1].first[i] != s.first[i] )
        varied[i] = 1;
    }
  }
  prof.toggle_rate.resize( num, 0.0 );
  prof.stuck_value.resize( num );
  prof.one_fraction.resize( num, 0.0 );
  const size_t pairs = rows.size() - 1;
  for ( size_t i = 0; i < num; ++i )
  {
    if ( pairs > 0 )
      prof.toggle_rate[i] = static_cast<double>( toggles[i] ) / static_cast<double>( pairs );
    prof.one_fraction[i] = static_cast<double>( ones[i] ) / static_cast<double>( rows.size() );
    if ( !varied[i] && toggles[i] == 0 )
      prof.stuck_value[i] = stats[0].first[i] != 0;
  }
  return prof;
}

/*! \brief Switching-plus-static power proxy:
 * sum of gate_weight * toggle_rate plus lambda * gate_equivalents.
 */
inline double power_proxy( area_report const& a, activity_profile const& act, double lambda = 1.0 )
{
  assert( a.per_node_weight.size() == act.toggle_rate.size() );
  double dynamic = 0.0;
  for ( size_t i = 0; i < a.per_node_weight.size(); ++i )
    dynamic += a.per_node_weight[i] * act.toggle_rate[i];
  return dynamic + lambda * a.gate_equivalents;
}

} // namespace bespoke
