/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file netlist_io.hpp
  \brief Netlist serialization: a structural Verilog-2001 subset and a
  JSON mirror of the in-memory form

  The Verilog writer emits primitive gate instantiations for two-input
  cells and inverters, and continuous assignments for constants,
  input-bit aliases, multiplexers, and output bits. The JSON form
  round-trips exactly.
*/

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "netlist.hpp"

namespace bespoke
{

namespace detail
{

inline std::string verilog_primitive( gate_op op )
{
  switch ( op )
  {
  case gate_op::inv: return "not";
  case gate_op::and2: return "and";
  case gate_op::or2: return "or";
  case gate_op::nand2: return "nand";
  case gate_op::nor2: return "nor";
  case gate_op::xor2: return "xor";
  case gate_op::xnor2: return "xnor";
  default: return "";
  }
}

} // namespace detail

/*! \brief Structural Verilog for a validated netlist. */
inline std::string to_verilog( netlist const& n )
{
  validate( n );
  std::ostringstream out;
  out << "module " << n.name << " (";
  bool first = true;
  for ( auto const& p : n.inputs )
  {
    out << ( first ? " " : ", " ) << p.name;
    first = false;
  }
  for ( auto const& p : n.outputs )
  {
    out << ( first ? " " : ", " ) << p.name;
    first = false;
  }
  out << " );\n";
  for ( auto const& p : n.inputs )
    out << "  input [" << p.bits.size() - 1 << ":0] " << p.name << ";\n";
  for ( auto const& p : n.outputs )
    out << "  output [" << p.bits.size() - 1 << ":0] " << p.name << ";\n";

  const auto wire_of = []( uint32_t id ) { return "n" + std::to_string( id ); };
  for ( size_t i = 0; i < n.nodes.size(); ++i )
    out << "  wire " << wire_of( static_cast<uint32_t>( i ) ) << ";\n";

  /* input-bit aliases first, so every node reads from a named wire */
  for ( auto const& p : n.inputs )
  {
    for ( size_t b = 0; b < p.bits.size(); ++b )
      out << "  assign " << wire_of( p.bits[b] ) << " = " << p.name << "[" << b << "];\n";
  }
  for ( size_t i = 0; i < n.nodes.size(); ++i )
  {
    auto const& g = n.nodes[i];
    const std::string w = wire_of( static_cast<uint32_t>( i ) );
    const std::string prim = detail::verilog_primitive( g.op );
    if ( g.op == gate_op::const0 )
      out << "  assign " << w << " = 1'b0;\n";
    else if ( g.op == gate_op::const1 )
      out << "  assign " << w << " = 1'b1;\n";
    else if ( g.op == gate_op::mux2 )
      out << "  assign " << w << " = " << wire_of( g.fanin[0] ) << " ? " << wire_of( g.fanin[2] ) << " : "
          << wire_of( g.fanin[1] ) << ";\n";
    else if ( !prim.empty() && fanin_count( g.op ) == 1 )
      out << "  " << prim << " g" << i << " ( " << w << ", " << wire_of( g.fanin[0] ) << " );\n";
    else if ( !prim.empty() )
      out << "  " << prim << " g" << i << " ( " << w << ", " << wire_of( g.fanin[0] ) << ", "
          << wire_of( g.fanin[1] ) << " );\n";
  }
  for ( auto const& p : n.outputs )
  {
    for ( size_t b = 0; b < p.bits.size(); ++b )
      out << "  assign " << p.name << "[" << b << "] = " << wire_of( p.bits[b] ) << ";\n";
  }
  out << "endmodule\n";
  return out.str();
}

inline nlohmann::json netlist_to_json( netlist const& n )
{
  validate( n );
  nlohmann::json j;
  j["name"] = n.name;
  j["num_pis"] = n.num_pis;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for ( auto const& g : n.nodes )
  {
    nlohmann::json e;
    e["op"] = to_string( g.op );
    auto& fanin = e["fanin"] = nlohmann::json::array();
    for ( int k = 0; k < fanin_count( g.op ); ++k )
      fanin.push_back( g.fanin[static_cast<size_t>( k )] );
    nodes.push_back( std::move( e ) );
  }
  const auto ports = []( std::vector<port> const& ps ) {
    nlohmann::json arr = nlohmann::json::array();
    for ( auto const& p : ps )
    {
      nlohmann::json e;
      e["name"] = p.name;
      e["bits"] = p.bits;
      e["signed"] = p.is_signed;
      arr.push_back( std::move( e ) );
    }
    return arr;
  };
  j["inputs"] = ports( n.inputs );
  j["outputs"] = ports( n.outputs );
  return j;
}

inline netlist netlist_from_json( nlohmann::json const& j )
{
  const auto require = []( nlohmann::json const& o, char const* key, char const* where ) {
    if ( !o.contains( key ) )
      throw validation_error( where, std::string( "missing field '" ) + key + "'" );
    return o.at( key );
  };
  netlist n;
  n.name = require( j, "name", "netlist" ).get<std::string>();
  n.num_pis = require( j, "num_pis", "netlist" ).get<uint32_t>();
  for ( auto const& e : require( j, "nodes", "netlist" ) )
  {
    const std::string op_name = require( e, "op", "netlist.nodes" ).get<std::string>();
    gate g;
    bool found = false;
    for ( gate_op op : { gate_op::pi, gate_op::const0, gate_op::const1, gate_op::inv, gate_op::and2, gate_op::or2,
                         gate_op::nand2, gate_op::nor2, gate_op::xor2, gate_op::xnor2, gate_op::mux2 } )
    {
      if ( to_string( op ) == op_name )
      {
        g.op = op;
        found = true;
        break;
      }
    }
    if ( !found )
      throw validation_error( "netlist.nodes", "unknown op '" + op_name + "'" );
    const auto fanin = require( e, "fanin", "netlist.nodes" );
    if ( static_cast<int>( fanin.size() ) != fanin_count( g.op ) )
      throw validation_error( "netlist.nodes", "op '" + op_name + "' expects " +
                                                   std::to_string( fanin_count( g.op ) ) + " fanins" );
    for ( size_t k = 0; k < fanin.size(); ++k )
      g.fanin[k] = fanin[k].get<uint32_t>();
    n.nodes.push_back( g );
  }
  const auto ports = [&]( nlohmann::json const& arr, char const* where ) {
    std::vector<port> ps;
    for ( auto const& e : arr )
    {
      port p;
      p.name = require( e, "name", where ).get<std::string>();
      p.bits = require( e, "bits", where ).get<std::vector<uint32_t>>();
      p.is_signed = require( e, "signed", where ).get<bool>();
      ps.push_back( std::move( p ) );
    }
    return ps;
  };
  n.inputs = ports( require( j, "inputs", "netlist" ), "netlist.inputs" );
  n.outputs = ports( require( j, "outputs", "netlist" ), "netlist.outputs" );
  validate( n );
  return n;
}

inline void save_netlist_verilog( netlist const& n, std::string const& path )
{
  std::ofstream out( path );
  if ( !out )
    throw validation_error( path, "cannot write netlist file" );
  out << to_verilog( n );
}

inline void save_netlist_json( netlist const& n, std::string const& path )
{
  std::ofstream out( path );
  if ( !out )
    throw validation_error( path, "cannot write netlist file" );
  out << netlist_to_json( n ).dump( 2 ) << "\n";
}

inline netlist load_netlist_json( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw validation_error( path, "cannot open netlist file" );
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw validation_error( path, std::string( "JSON parse failure: " ) + e.what() );
  }
  return netlist_from_json( j );
}

} // namespace bespoke
