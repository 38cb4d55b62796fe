/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

#include <catch2/catch_amalgamated.hpp>

#include <bespoke/flow.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace bespoke;

namespace
{

trained_model small_mlp()
{
  trained_model m;
  m.kind = model_kind::mlp_classifier;
  m.input_count = 3;
  m.class_count = 3;
  mlp_body body;
  body.layers.push_back( { { { 0.8, -0.5, 0.3 }, { -0.4, 0.9, 0.2 }, { 0.3, 0.3, -0.7 } },
                           { 0.1, -0.2, 0.05 },
                           activation::relu } );
  body.layers.push_back( { { { 0.7, -0.6, 0.2 }, { -0.3, 0.5, 0.4 }, { 0.2, 0.1, -0.5 } },
                           { 0.05, 0.0, -0.1 },
                           activation::none } );
  m.body = std::move( body );
  return m;
}

trained_model small_tree()
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 2;
  m.class_count = 3;
  tree_body body;
  body.nodes.resize( 5 );
  body.nodes[0] = { 0, 0.47, 1, 2, -1 };
  body.nodes[1].label = 0;
  body.nodes[2] = { 1, 0.72, 3, 4, -1 };
  body.nodes[3].label = 1;
  body.nodes[4].label = 2;
  body.root = 0;
  m.body = std::move( body );
  return m;
}

dataset labeled_by_float( trained_model const& m, fxp_format in_fmt, size_t rows, uint64_t seed )
{
  dataset d;
  d.class_count = m.class_count;
  d.feature_ranges.assign( static_cast<size_t>( m.input_count ), { 0.0, 1.0 } );
  const auto scalers = fit_scalers( d.feature_ranges, in_fmt );
  std::mt19937_64 rng( seed );
  std::uniform_real_distribution<double> unit( 0.0, 1.0 );
  for ( size_t r = 0; r < rows; ++r )
  {
    std::vector<double> row( static_cast<size_t>( m.input_count ) );
    for ( auto& v : row )
      v = unit( rng );
    d.labels.push_back( infer_float( m, scalers, row, m.class_count ) );
    d.rows.push_back( std::move( row ) );
  }
  return d;
}

flow_config test_config()
{
  flow_config cfg;
  cfg.seed = 11;
  cfg.population = 8;
  cfg.generations = 4;
  cfg.delta = 8;
  return cfg;
}

std::string slurp( std::string const& path )
{
  std::ifstream in( path, std::ios::binary );
  REQUIRE( in );
  return { std::istreambuf_iterator<char>( in ), std::istreambuf_iterator<char>() };
}

} // namespace

TEST_CASE( "config json round trips and the seed is mandatory" )
{
  flow_config c;
  c.seed = 42;
  c.delta = 5;
  c.netlist_format = "json";
  c.calibration_mw_per_ge = 0.25;
  const auto j = config_to_json( c );
  const auto back = config_from_json( j );
  CHECK( config_to_json( back ).dump() == j.dump() );

  auto missing = j;
  missing.erase( "seed" );
  CHECK_THROWS_AS( config_from_json( missing ), validation_error );

  const auto lean = config_from_json( { { "seed", 7 } } );
  CHECK( lean.seed == 7 );
  CHECK( lean.input_bits == 4 );
  CHECK( lean.population == 100 );
}

TEST_CASE( "config validation rejects out of range fields" )
{
  const auto broken = []( auto mutate ) {
    flow_config c;
    c.seed = 1;
    mutate( c );
    return c;
  };
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.input_bits = 0; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.input_fraction = 5; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.weight_bits = 1; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.weight_fraction = 8; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.delta = -1; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.accuracy_budget_pp = -0.1; } ) ),
                   validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.prune_batch = 0; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.test_fraction = 1.0; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.validation_fraction = 0.0; } ) ),
                   validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.threads = 0; } ) ), validation_error );
  CHECK_THROWS_AS( validate_config( broken( []( flow_config& c ) { c.netlist_format = "blif"; } ) ),
                   validation_error );
}

TEST_CASE( "weight fraction fitting avoids saturation" )
{
  auto m = small_mlp();
  /* max |w| = 0.9 -> at 8 bits, fraction 7 gives round(0.9 * 128) = 115 <= 127 */
  CHECK( fit_weight_fraction( m, 8 ) == 7 );
  std::get<mlp_body>( m.body ).layers[0].weights[0][0] = 1.9;
  /* round(1.9 * 128) = 243 > 127, round(1.9 * 64) = 122 <= 127 */
  CHECK( fit_weight_fraction( m, 8 ) == 6 );
  std::get<mlp_body>( m.body ).layers[0].weights[0][0] = 200.0;
  CHECK( fit_weight_fraction( m, 8 ) == 0 );
  CHECK( fit_weight_fraction( small_tree(), 8 ) == 7 );
}

TEST_CASE( "synth flow produces an equivalent circuit and a zero gain report" )
{
  const auto m = small_mlp();
  const auto cfg = test_config();
  const auto data = labeled_by_float( m, { cfg.input_bits, cfg.input_fraction, false }, 60, 31 );
  const auto r = run_synth( "toy_mlp", m, data, cfg );

  CHECK( r.report.phase == std::string{ phase_exact } );
  CHECK( r.report.model_id == "toy_mlp" );
  CHECK( r.report.accuracy_test == accuracy( r.q, r.test ) );
  CHECK( r.report.area_proxy == area( r.circuit ).gate_equivalents );
  CHECK( r.report.area_gain_pct == 0.0 );
  CHECK( r.report.power_gain_pct == 0.0 );
  CHECK( !r.report.battery.has_value() );
  CHECK( r.report.area_proxy > 0.0 );
  CHECK( r.report.power_proxy > 0.0 );
  CHECK( r.train.size() + r.test.size() == data.size() );

  const auto eq = check_equivalence( r.q, r.circuit, 300, 77 );
  CHECK( eq.rows == 300 );
  CHECK( eq.mismatches == 0 );

  auto with_battery = cfg;
  with_battery.calibration_mw_per_ge = 0.001;
  const auto rb = run_synth( "toy_mlp", m, data, with_battery );
  REQUIRE( rb.report.battery.has_value() );
  CHECK( rb.report.battery->estimated_mw == Catch::Approx( rb.report.power_proxy * 0.001 ) );
}

TEST_CASE( "equivalence check counts circuit versus software mismatches" )
{
  const auto m = small_mlp();
  const auto cfg = test_config();
  const auto data = labeled_by_float( m, { cfg.input_bits, cfg.input_fraction, false }, 40, 32 );
  const auto r = run_synth( "toy_mlp", m, data, cfg );

  auto corrupted = r.circuit;
  corrupted.outputs[0].bits[0] = 0; /* reroute the label lsb to an input pi */
  const auto eq = check_equivalence( r.q, corrupted, 300, 77 );
  CHECK( eq.mismatches > 0 );
  CHECK_FALSE( eq.ok() );
}

TEST_CASE( "approx flow respects the end to end training budget" )
{
  const auto m = small_mlp();
  const auto cfg = test_config();
  const auto data = labeled_by_float( m, { cfg.input_bits, cfg.input_fraction, false }, 60, 33 );
  const auto r = run_approx( "toy_mlp", m, data, cfg );

  REQUIRE( r.oracle.ok() );
  REQUIRE( r.report.oracle_equivalent.has_value() );
  CHECK( *r.report.oracle_equivalent );
  CHECK( r.plan.window <= cfg.delta );
  CHECK( r.report.phase == std::string{ phase_approximated } );

  const auto train_stimuli = stimulus_from( r.approx_q, r.exact.train );
  const double floor = r.exact.train_accuracy - cfg.accuracy_budget_pp / 100.0;
  CHECK( netlist_accuracy( r.circuit, train_stimuli, r.exact.train.labels ) >= floor - 1e-9 );

  /* pruning never grows the re-synthesized circuit */
  const auto resynth = synth_model( r.approx_q, "toy_mlp" );
  CHECK( r.report.area_proxy <= area( resynth ).gate_equivalents );
  CHECK( r.report.area_gain_pct ==
         Catch::Approx( gain_pct( r.exact.report.area_proxy, r.report.area_proxy ) ) );
}

TEST_CASE( "approx flow is deterministic across runs and thread counts" )
{
  const auto m = small_mlp();
  auto cfg = test_config();
  const auto data = labeled_by_float( m, { cfg.input_bits, cfg.input_fraction, false }, 60, 34 );
  const auto a = run_approx( "toy_mlp", m, data, cfg );
  const auto b = run_approx( "toy_mlp", m, data, cfg );
  cfg.threads = 3;
  const auto c = run_approx( "toy_mlp", m, data, cfg );

  CHECK( a.circuit == b.circuit );
  CHECK( a.circuit == c.circuit );
  CHECK( report_to_json( a.report ).dump() == report_to_json( b.report ).dump() );
  CHECK( report_to_json( a.report ).dump() == report_to_json( c.report ).dump() );
  CHECK( to_verilog( a.circuit ) == to_verilog( c.circuit ) );
}

TEST_CASE( "evolve flow selects a feasible cheaper comparator configuration" )
{
  const auto m = small_tree();
  const auto cfg = test_config();
  const auto data = labeled_by_float( m, { cfg.input_bits, cfg.input_fraction, false }, 80, 35 );
  const auto r = run_evolve( "toy_tree", m, data, cfg );

  CHECK( r.search.selected_loss_pp <= cfg.accuracy_budget_pp );
  CHECK( r.proxy_gain_pct >= 0.0 );
  CHECK( r.search.selected_area <= r.search.baseline_area );
  REQUIRE( r.oracle.ok() );
  CHECK( r.core.size() + r.validation.size() == r.exact.train.size() );
  CHECK( r.report.phase == std::string{ phase_approximated } );
  CHECK( r.test_accuracy == accuracy( r.selected_q, r.exact.test ) );

  const auto again = run_evolve( "toy_tree", m, data, cfg );
  CHECK( r.circuit == again.circuit );
  CHECK( report_to_json( r.report ).dump() == report_to_json( again.report ).dump() );
  CHECK( pareto_csv( r.search.front ) == pareto_csv( again.search.front ) );
}

TEST_CASE( "commands write their artifacts and reruns are byte identical" )
{
  const auto out = std::filesystem::path( "flow_cmd_out" );
  std::filesystem::remove_all( out );

  const auto mlp = small_mlp();
  const auto tree = small_tree();
  auto cfg = test_config();
  cfg.calibration_mw_per_ge = 0.002;
  const fxp_format in_fmt{ cfg.input_bits, cfg.input_fraction, false };
  const auto mlp_data = labeled_by_float( mlp, in_fmt, 60, 36 );
  const auto tree_data = labeled_by_float( tree, in_fmt, 80, 37 );

  CHECK( cmd_synth( "toy_mlp", mlp, mlp_data, cfg, out.string() ) == exit_ok );
  CHECK( cmd_approx( "toy_mlp", mlp, mlp_data, cfg, out.string() ) == exit_ok );
  CHECK( cmd_evolve( "toy_tree", tree, tree_data, cfg, out.string() ) == exit_ok );
  CHECK( cmd_eval( "toy_mlp", mlp, mlp_data, cfg, out.string() ) == exit_ok );
  CHECK( cmd_report( out.string() ) == exit_ok );

  for ( const char* name : { "toy_mlp_exact.v", "toy_mlp_approx.v", "toy_mlp_plan.json", "toy_mlp_prune_log.json",
                             "toy_mlp_exact_report.json", "toy_mlp_approx_report.json", "toy_tree_exact.v",
                             "toy_tree_approx.v", "toy_tree_pareto.csv", "toy_tree_selected.json",
                             "toy_tree_exact_report.json", "toy_tree_approx_report.json", "summary.csv" } )
    CHECK( std::filesystem::exists( out / name ) );

  const auto summary = slurp( ( out / "summary.csv" ).string() );
  CHECK( summary.rfind( "model,phase,Ac,A,P,AG,PG\n", 0 ) == 0 );
  /* four _report.json files -> header plus four rows */
  CHECK( std::count( summary.begin(), summary.end(), '\n' ) == 5 );

  const auto approx_netlist = slurp( ( out / "toy_mlp_approx.v" ).string() );
  const auto approx_report = slurp( ( out / "toy_mlp_approx_report.json" ).string() );
  const auto pareto = slurp( ( out / "toy_tree_pareto.csv" ).string() );

  CHECK( cmd_approx( "toy_mlp", mlp, mlp_data, cfg, out.string() ) == exit_ok );
  CHECK( cmd_evolve( "toy_tree", tree, tree_data, cfg, out.string() ) == exit_ok );
  CHECK( slurp( ( out / "toy_mlp_approx.v" ).string() ) == approx_netlist );
  CHECK( slurp( ( out / "toy_mlp_approx_report.json" ).string() ) == approx_report );
  CHECK( slurp( ( out / "toy_tree_pareto.csv" ).string() ) == pareto );

  auto json_cfg = cfg;
  json_cfg.netlist_format = "json";
  CHECK( cmd_synth( "toy_mlp", mlp, mlp_data, json_cfg, out.string() ) == exit_ok );
  CHECK( std::filesystem::exists( out / "toy_mlp_exact.json" ) );
  const auto loaded = load_netlist_json( ( out / "toy_mlp_exact.json" ).string() );
  CHECK( loaded.num_pis == 3u * static_cast<uint32_t>( cfg.input_bits ) );

  std::filesystem::remove_all( out );
}

TEST_CASE( "command and kind mismatches surface as validation errors" )
{
  const auto tree = small_tree();
  const auto mlp = small_mlp();
  const auto cfg = test_config();
  const fxp_format in_fmt{ cfg.input_bits, cfg.input_fraction, false };
  const auto tree_data = labeled_by_float( tree, in_fmt, 60, 38 );
  const auto mlp_data = labeled_by_float( mlp, in_fmt, 60, 39 );
  CHECK_THROWS_AS( run_approx( "t", tree, tree_data, cfg ), validation_error );
  CHECK_THROWS_AS( run_evolve( "m", mlp, mlp_data, cfg ), validation_error );
}

TEST_CASE( "report json for a bundled fixture is frozen byte for byte" )
{
  flow_config cfg;
  cfg.seed = 1;
  cfg.input_bits = 8;
  cfg.input_fraction = 8;
  cfg.calibration_mw_per_ge = 0.001;
  const std::string root = BESPOKE_SOURCE_DIR;
  const auto m = load_model( root + "/data/dt_iris.json" );
  const auto d = load_dataset( root + "/data/iris.csv", m.input_count, m.class_count );
  const auto r = run_synth( "dt_iris", m, d, cfg );

  const std::string golden = R"json({
  "accuracy_test": 0.9555555555555556,
  "area_gain_pct": 0.0,
  "area_proxy": 25.0,
  "battery": {
    "calibration_mw_per_ge": 0.001,
    "estimated_mw": 0.031340909090909086,
    "feasible_under": [
      "molex-30mw",
      "blue-spark-3mw",
      "harvester-0.1mw"
    ]
  },
  "model": "dt_iris",
  "phase": "exact-bespoke",
  "power_gain_pct": 0.0,
  "power_proxy": 31.340909090909086
})json";
  CHECK( report_to_json( r.report ).dump( 2 ) == golden );
}
