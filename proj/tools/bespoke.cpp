/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file bespoke.cpp
  \brief Command line front end for the synthesis and approximation flow

  Subcommands: synth | approx | evolve | eval | report. Exit status is 0 on
  success, 2 on validation errors, 3 when a deliverable circuit fails the
  input-sampled equivalence check against software inference.
*/

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <bespoke/flow.hpp>

namespace
{

bespoke::flow_config load_config( std::string const& config_path, bool seed_set, uint64_t seed_flag )
{
  bespoke::flow_config cfg;
  bool have_seed = false;
  if ( !config_path.empty() )
  {
    std::ifstream in( config_path );
    if ( !in )
      throw bespoke::validation_error( config_path, "cannot open config file" );
    nlohmann::json j;
    in >> j;
    if ( seed_set && !j.contains( "seed" ) )
      j["seed"] = seed_flag;
    cfg = bespoke::config_from_json( j );
    have_seed = true;
  }
  if ( seed_set )
  {
    cfg.seed = seed_flag;
    have_seed = true;
  }
  if ( !have_seed )
    throw bespoke::validation_error( "config", "a seed is required, via --seed or the config file" );
  return cfg;
}

std::string model_id_from_path( std::string const& model_path )
{
  return std::filesystem::path( model_path ).stem().string();
}

} // namespace

int main( int argc, char** argv )
{
  CLI::App app{ "hardwired-coefficient classifier circuits" };
  app.require_subcommand( 1 );

  std::string model_path;
  std::string data_path;
  std::string config_path;
  std::string out_dir = "out";
  std::string netlist_format;
  uint64_t seed_flag = 0;
  bool seed_set = false;
  double calibration = 0.0;
  bool calibration_set = false;

  const auto add_common = [&]( CLI::App* cmd, bool needs_inputs ) {
    if ( needs_inputs )
    {
      cmd->add_option( "--model", model_path, "trained model JSON" )->required();
      cmd->add_option( "--data", data_path, "dataset CSV" )->required();
      cmd->add_option( "--config", config_path, "flow configuration JSON" );
      cmd->add_option( "--seed", seed_flag, "master seed (overrides the config)" )
          ->each( [&]( std::string const& ) { seed_set = true; } );
      cmd->add_option( "--netlist-format", netlist_format, "verilog or json" )
          ->check( CLI::IsMember( { "verilog", "json" } ) );
      cmd->add_option( "--calibration-mw-per-ge", calibration, "mW per gate equivalent" )
          ->each( [&]( std::string const& ) { calibration_set = true; } );
    }
    cmd->add_option( "--out-dir", out_dir, "output directory" );
  };

  auto* synth = app.add_subcommand( "synth", "quantize and synthesize the exact circuit" );
  auto* approx = app.add_subcommand( "approx", "approximate coefficients and prune gates" );
  auto* evolve = app.add_subcommand( "evolve", "search tree comparator configurations" );
  auto* eval = app.add_subcommand( "eval", "evaluate accuracy, area, and power" );
  auto* report = app.add_subcommand( "report", "merge reports into a summary table" );
  for ( auto* cmd : { synth, approx, evolve, eval } )
    add_common( cmd, true );
  add_common( report, false );

  CLI11_PARSE( app, argc, argv );

  try
  {
    if ( report->parsed() )
      return bespoke::cmd_report( out_dir );

    auto cfg = load_config( config_path, seed_set, seed_flag );
    if ( !netlist_format.empty() )
      cfg.netlist_format = netlist_format;
    if ( calibration_set )
      cfg.calibration_mw_per_ge = calibration;
    bespoke::validate_config( cfg );

    const auto id = model_id_from_path( model_path );
    const auto model = bespoke::load_model( model_path );
    const auto data = bespoke::load_dataset( data_path, model.input_count, model.class_count );

    int status = bespoke::exit_invalid;
    if ( synth->parsed() )
      status = bespoke::cmd_synth( id, model, data, cfg, out_dir );
    else if ( approx->parsed() )
      status = bespoke::cmd_approx( id, model, data, cfg, out_dir );
    else if ( evolve->parsed() )
      status = bespoke::cmd_evolve( id, model, data, cfg, out_dir );
    else if ( eval->parsed() )
      status = bespoke::cmd_eval( id, model, data, cfg, out_dir );
    if ( status == bespoke::exit_not_equivalent )
      std::cerr << "error: circuit is not equivalent to software inference\n";
    return status;
  }
  catch ( std::exception const& e )
  {
    std::cerr << "error: " << e.what() << "\n";
    return bespoke::exit_invalid;
  }
}
