/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file builder.hpp
  \brief Netlist construction with structural hashing and local rewriting

  The builder folds constants, merges structurally identical gates, and
  applies two-level simplifications (complement, absorption) at creation
  time. Gates therefore never have constant fanins: a constant value only
  materializes as a CONST node when an output port must expose it.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "netlist.hpp"

namespace bespoke
{

/*! \brief A builder value: either a net id or a known constant. */
struct nref
{
  int8_t cval = -1; /* -1: a net; 0/1: a constant */
  uint32_t id = 0;

  bool is_const() const { return cval >= 0; }
  bool operator==( nref const& ) const = default;
};

inline nref net_of( uint32_t id )
{
  return nref{ -1, id };
}

inline nref const_of( bool v )
{
  return nref{ static_cast<int8_t>( v ? 1 : 0 ), 0 };
}

class circuit_builder
{
public:
  explicit circuit_builder( std::string name = "top" ) { net_.name = std::move( name ); }

  /*! \brief Declares a primary-input port; all inputs precede all gates. */
  std::vector<nref> add_input_port( std::string const& name, size_t width, bool is_signed = false )
  {
    if ( gates_started_ )
      throw validation_error( net_.name, "input port '" + name + "' declared after gate creation" );
    port p;
    p.name = name;
    p.is_signed = is_signed;
    std::vector<nref> bits;
    for ( size_t b = 0; b < width; ++b )
    {
      const uint32_t id = static_cast<uint32_t>( net_.nodes.size() );
      net_.nodes.push_back( { gate_op::pi, {} } );
      ++net_.num_pis;
      p.bits.push_back( id );
      bits.push_back( net_of( id ) );
    }
    net_.inputs.push_back( std::move( p ) );
    return bits;
  }

  void add_output_port( std::string const& name, std::vector<nref> const& bits, bool is_signed = false )
  {
    port p;
    p.name = name;
    p.is_signed = is_signed;
    for ( auto const& b : bits )
      p.bits.push_back( materialize( b ) );
    net_.outputs.push_back( std::move( p ) );
  }

  nref create_not( nref a )
  {
    if ( a.is_const() )
      return const_of( a.cval == 0 );
    if ( net_.nodes[a.id].op == gate_op::inv )
      return net_of( net_.nodes[a.id].fanin[0] );
    return raw_gate( gate_op::inv, a.id, 0, 0 );
  }

  nref create_and( nref a, nref b )
  {
    if ( a.is_const() )
      return a.cval ? b : const_of( false );
    if ( b.is_const() )
      return b.cval ? a : const_of( false );
    if ( a.id == b.id )
      return a;
    if ( complementary( a.id, b.id ) )
      return const_of( false );
    if ( auto r = absorb_and( a.id, b.id ) )
      return *r;
    if ( auto r = absorb_and( b.id, a.id ) )
      return *r;
    order( a, b );
    return raw_gate( gate_op::and2, a.id, b.id, 0 );
  }

  nref create_or( nref a, nref b )
  {
    if ( a.is_const() )
      return a.cval ? const_of( true ) : b;
    if ( b.is_const() )
      return b.cval ? const_of( true ) : a;
    if ( a.id == b.id )
      return a;
    if ( complementary( a.id, b.id ) )
      return const_of( true );
    if ( auto r = absorb_or( a.id, b.id ) )
      return *r;
    if ( auto r = absorb_or( b.id, a.id ) )
      return *r;
    order( a, b );
    return raw_gate( gate_op::or2, a.id, b.id, 0 );
  }

  nref create_nand( nref a, nref b )
  {
    if ( a.is_const() || b.is_const() || a.id == b.id || complementary( a.id, b.id ) )
      return create_not( create_and( a, b ) );
    order( a, b );
    return raw_gate( gate_op::nand2, a.id, b.id, 0 );
  }

  nref create_nor( nref a, nref b )
  {
    if ( a.is_const() || b.is_const() || a.id == b.id || complementary( a.id, b.id ) )
      return create_not( create_or( a, b ) );
    order( a, b );
    return raw_gate( gate_op::nor2, a.id, b.id, 0 );
  }

  nref create_xor( nref a, nref b )
  {
    if ( a.is_const() )
      return a.cval ? create_not( b ) : b;
    if ( b.is_const() )
      return b.cval ? create_not( a ) : a;
    if ( a.id == b.id )
      return const_of( false );
    if ( complementary( a.id, b.id ) )
      return const_of( true );
    order( a, b );
    return raw_gate( gate_op::xor2, a.id, b.id, 0 );
  }

  nref create_xnor( nref a, nref b )
  {
    if ( a.is_const() )
      return a.cval ? b : create_not( b );
    if ( b.is_const() )
      return b.cval ? a : create_not( a );
    if ( a.id == b.id )
      return const_of( true );
    if ( complementary( a.id, b.id ) )
      return const_of( false );
    order( a, b );
    return raw_gate( gate_op::xnor2, a.id, b.id, 0 );
  }

  nref create_mux( nref sel, nref d0, nref d1 )
  {
    if ( sel.is_const() )
      return sel.cval ? d1 : d0;
    if ( d0 == d1 )
      return d0;
    if ( d0.is_const() && d1.is_const() )
      return d0.cval ? create_not( sel ) : nref{ sel }; /* (0,1) is sel, (1,0) its inverse */
    if ( d0.is_const() )
      return d0.cval ? create_or( create_not( sel ), d1 ) : create_and( sel, d1 );
    if ( d1.is_const() )
      return d1.cval ? create_or( sel, d0 ) : create_and( create_not( sel ), d0 );
    if ( !d0.is_const() && !d1.is_const() && complementary( d0.id, d1.id ) )
      return create_xnor( sel, d1 ); /* sel ? d1 : not d1 */
    return raw_gate( gate_op::mux2, sel.id, d0.id, d1.id );
  }

  /*! \brief Node id for a value, creating a CONST node when needed. */
  uint32_t materialize( nref v )
  {
    if ( !v.is_const() )
      return v.id;
    return raw_gate( v.cval ? gate_op::const1 : gate_op::const0, 0, 0, 0 ).id;
  }

  netlist const& network() const { return net_; }

  /*! \brief Finished netlist with unreachable gates removed. */
  netlist finish();

private:
  static void order( nref& a, nref& b )
  {
    if ( a.id > b.id )
      std::swap( a, b );
  }

  bool complementary( uint32_t x, uint32_t y ) const
  {
    auto const is_inv_of = [this]( uint32_t inv, uint32_t base ) {
      return net_.nodes[inv].op == gate_op::inv && net_.nodes[inv].fanin[0] == base;
    };
    return is_inv_of( x, y ) || is_inv_of( y, x );
  }

  /* AND(a, OR(a, c)) -> a; AND(a, OR(not a, c)) -> AND(a, c) */
  std::optional<nref> absorb_and( uint32_t a, uint32_t b )
  {
    if ( net_.nodes[b].op != gate_op::or2 )
      return std::nullopt;
    const uint32_t x = net_.nodes[b].fanin[0];
    const uint32_t y = net_.nodes[b].fanin[1];
    if ( x == a || y == a )
      return net_of( a );
    if ( complementary( x, a ) )
      return create_and( net_of( a ), net_of( y ) );
    if ( complementary( y, a ) )
      return create_and( net_of( a ), net_of( x ) );
    return std::nullopt;
  }

  /* OR(a, AND(a, c)) -> a; OR(a, AND(not a, c)) -> OR(a, c) */
  std::optional<nref> absorb_or( uint32_t a, uint32_t b )
  {
    if ( net_.nodes[b].op != gate_op::and2 )
      return std::nullopt;
    const uint32_t x = net_.nodes[b].fanin[0];
    const uint32_t y = net_.nodes[b].fanin[1];
    if ( x == a || y == a )
      return net_of( a );
    if ( complementary( x, a ) )
      return create_or( net_of( a ), net_of( y ) );
    if ( complementary( y, a ) )
      return create_or( net_of( a ), net_of( x ) );
    return std::nullopt;
  }

  nref raw_gate( gate_op op, uint32_t f0, uint32_t f1, uint32_t f2 )
  {
    gates_started_ = true;
    uint64_t key = static_cast<uint64_t>( op );
    key = key * 0x9e3779b97f4a7c15ull + f0;
    key = key * 0x9e3779b97f4a7c15ull + f1;
    key = key * 0x9e3779b97f4a7c15ull + f2;
    auto [it, inserted] = strash_.try_emplace( key );
    if ( !inserted )
    {
      for ( uint32_t id : it->second )
      {
        auto const& g = net_.nodes[id];
        if ( g.op == op && g.fanin[0] == f0 && g.fanin[1] == f1 && g.fanin[2] == f2 )
          return net_of( id );
      }
    }
    const uint32_t id = static_cast<uint32_t>( net_.nodes.size() );
    net_.nodes.push_back( { op, { f0, f1, f2 } } );
    it->second.push_back( id );
    return net_of( id );
  }

  netlist net_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> strash_;
  bool gates_started_ = false;
};

/*! \brief Removes gates not reachable from any output; inputs always stay.
 * Node ids are compacted in place, preserving relative (topological) order.
 */
inline netlist sweep_dead( netlist const& n )
{
  std::vector<bool> keep( n.nodes.size(), false );
  for ( uint32_t b = 0; b < n.num_pis; ++b )
    keep[b] = true;
  for ( auto const& p : n.outputs )
  {
    for ( uint32_t b : p.bits )
      keep[b] = true;
  }
  for ( size_t i = n.nodes.size(); i-- > n.num_pis; )
  {
    if ( !keep[i] )
      continue;
    auto const& g = n.nodes[i];
    for ( int k = 0; k < fanin_count( g.op ); ++k )
      keep[g.fanin[static_cast<size_t>( k )]] = true;
  }

  std::vector<uint32_t> remap( n.nodes.size(), 0 );
  netlist out;
  out.name = n.name;
  out.num_pis = n.num_pis;
  out.inputs = n.inputs;
  for ( size_t i = 0; i < n.nodes.size(); ++i )
  {
    if ( !keep[i] )
      continue;
    remap[i] = static_cast<uint32_t>( out.nodes.size() );
    gate g = n.nodes[i];
    for ( int k = 0; k < fanin_count( g.op ); ++k )
      g.fanin[static_cast<size_t>( k )] = remap[g.fanin[static_cast<size_t>( k )]];
    out.nodes.push_back( g );
  }
  for ( auto const& p : n.outputs )
  {
    port np = p;
    for ( auto& b : np.bits )
      b = remap[b];
    out.outputs.push_back( std::move( np ) );
  }
  return out;
}

inline netlist circuit_builder::finish()
{
  return sweep_dead( net_ );
}

/*! \brief Replaces the listed gates by constants; ids are unchanged. */
inline netlist replace_with_constants( netlist const& n, std::vector<std::pair<uint32_t, bool>> const& replacements )
{
  netlist out = n;
  for ( auto const& [id, value] : replacements )
  {
    if ( id < n.num_pis || id >= n.nodes.size() )
      throw validation_error( n.name, "constant replacement targets node " + std::to_string( id ) );
    out.nodes[id] = { value ? gate_op::const1 : gate_op::const0, {} };
  }
  return out;
}

/*! \brief Replays the netlist through a fresh builder until neither area
 * nor node count improves. Semantics-preserving; area never increases.
 */
inline netlist const_propagate( netlist const& n )
{
  netlist cur = n;
  while ( true )
  {
    circuit_builder b( cur.name );
    std::vector<nref> map( cur.nodes.size() );
    for ( auto const& p : cur.inputs )
    {
      auto bits = b.add_input_port( p.name, p.bits.size(), p.is_signed );
      for ( size_t i = 0; i < bits.size(); ++i )
        map[p.bits[i]] = bits[i];
    }

    for ( size_t i = cur.num_pis; i < cur.nodes.size(); ++i )
    {
      auto const& g = cur.nodes[i];
      switch ( g.op )
      {
      case gate_op::const0:
        map[i] = const_of( false );
        break;
      case gate_op::const1:
        map[i] = const_of( true );
        break;
      case gate_op::inv:
        map[i] = b.create_not( map[g.fanin[0]] );
        break;
      case gate_op::and2:
        map[i] = b.create_and( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::or2:
        map[i] = b.create_or( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::nand2:
        map[i] = b.create_nand( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::nor2:
        map[i] = b.create_nor( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::xor2:
        map[i] = b.create_xor( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::xnor2:
        map[i] = b.create_xnor( map[g.fanin[0]], map[g.fanin[1]] );
        break;
      case gate_op::mux2:
        map[i] = b.create_mux( map[g.fanin[0]], map[g.fanin[1]], map[g.fanin[2]] );
        break;
      default:
        break;
      }
    }
    for ( auto const& p : cur.outputs )
    {
      std::vector<nref> bits;
      for ( uint32_t bit : p.bits )
        bits.push_back( map[bit] );
      b.add_output_port( p.name, bits, p.is_signed );
    }

    netlist next = b.finish();
    const double next_area = area( next ).gate_equivalents;
    const double cur_area = area( cur ).gate_equivalents;
    if ( next_area > cur_area )
      throw simulation_error( cur.name + ": propagation increased area" );
    if ( next_area == cur_area && next.nodes.size() >= cur.nodes.size() )
      return next;
    cur = std::move( next );
  }
}

} // namespace bespoke
