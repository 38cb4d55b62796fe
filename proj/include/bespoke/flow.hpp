/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file flow.hpp
  \brief End-to-end orchestration: quantize, synthesize, approximate, report

  One configuration object drives every stage; all randomness fans out from
  its single seed, so a rerun with the same inputs is byte-identical. The
  `approx` pipeline is coefficient approximation, re-synthesis, an
  input-sampled equivalence check of circuit against software inference, and
  activity-ranked pruning. The `evolve` pipeline searches tree comparator
  configurations and re-synthesizes the selected one, with the same
  equivalence check.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "coeff_approx.hpp"
#include "dataset.hpp"
#include "dt_evolve.hpp"
#include "gate_prune.hpp"
#include "model.hpp"
#include "netlist_io.hpp"
#include "quantized.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace bespoke
{

struct flow_config
{
  int input_bits = 4;
  int input_fraction = 4;
  int weight_bits = 8;
  int weight_fraction = -1; /* < 0 fits the largest fraction without overflow */
  int64_t delta = 8;        /* coefficient / threshold search window, in codes */
  double accuracy_budget_pp = 1.0;
  size_t prune_batch = 32;
  int population = 100;
  int generations = 100;
  double crossover_p = 0.9;
  double mutation_p = -1.0; /* < 0 picks 1 / gene count */
  uint64_t seed = 1;
  double test_fraction = 0.3;
  double validation_fraction = 0.25; /* of the training part, for dt search */
  unsigned threads = 1;
  std::string netlist_format = "verilog"; /* or "json" */
  double calibration_mw_per_ge = 0.0;     /* <= 0: no battery block */
};

inline void validate_config( flow_config const& c )
{
  if ( c.input_bits < 1 || c.input_bits > 16 )
    throw validation_error( "config", "input_bits outside [1, 16]" );
  if ( c.input_fraction < 0 || c.input_fraction > c.input_bits )
    throw validation_error( "config", "input_fraction outside [0, input_bits]" );
  if ( c.weight_bits < 2 || c.weight_bits > 16 )
    throw validation_error( "config", "weight_bits outside [2, 16]" );
  if ( c.weight_fraction >= c.weight_bits )
    throw validation_error( "config", "weight_fraction must leave an integer bit" );
  if ( c.delta < 0 )
    throw validation_error( "config", "delta must be nonnegative" );
  if ( c.accuracy_budget_pp < 0.0 )
    throw validation_error( "config", "accuracy budget must be nonnegative" );
  if ( c.prune_batch == 0 )
    throw validation_error( "config", "prune_batch must be positive" );
  if ( !( c.test_fraction > 0.0 && c.test_fraction < 1.0 ) )
    throw validation_error( "config", "test_fraction outside (0, 1)" );
  if ( !( c.validation_fraction > 0.0 && c.validation_fraction < 1.0 ) )
    throw validation_error( "config", "validation_fraction outside (0, 1)" );
  if ( c.threads == 0 )
    throw validation_error( "config", "threads must be positive" );
  if ( c.netlist_format != "verilog" && c.netlist_format != "json" )
    throw validation_error( "config", "netlist_format must be verilog or json" );
}

inline nlohmann::json config_to_json( flow_config const& c )
{
  return { { "input_bits", c.input_bits },
           { "input_fraction", c.input_fraction },
           { "weight_bits", c.weight_bits },
           { "weight_fraction", c.weight_fraction },
           { "delta", c.delta },
           { "accuracy_budget_pp", c.accuracy_budget_pp },
           { "prune_batch", c.prune_batch },
           { "population", c.population },
           { "generations", c.generations },
           { "crossover_p", c.crossover_p },
           { "mutation_p", c.mutation_p },
           { "seed", c.seed },
           { "test_fraction", c.test_fraction },
           { "validation_fraction", c.validation_fraction },
           { "threads", c.threads },
           { "netlist_format", c.netlist_format },
           { "calibration_mw_per_ge", c.calibration_mw_per_ge } };
}

/*! \brief Applies the fields present in `j` over the defaults. The seed is
 * mandatory: reproduction must never depend on wall-clock state.
 */
inline flow_config config_from_json( nlohmann::json const& j )
{
  flow_config c;
  if ( !j.contains( "seed" ) )
    throw validation_error( "config", "seed is required" );
  const auto take = [&]( const char* key, auto& field ) {
    if ( j.contains( key ) )
      field = j.at( key ).get<std::remove_reference_t<decltype( field )>>();
  };
  take( "input_bits", c.input_bits );
  take( "input_fraction", c.input_fraction );
  take( "weight_bits", c.weight_bits );
  take( "weight_fraction", c.weight_fraction );
  take( "delta", c.delta );
  take( "accuracy_budget_pp", c.accuracy_budget_pp );
  take( "prune_batch", c.prune_batch );
  take( "population", c.population );
  take( "generations", c.generations );
  take( "crossover_p", c.crossover_p );
  take( "mutation_p", c.mutation_p );
  take( "seed", c.seed );
  take( "test_fraction", c.test_fraction );
  take( "validation_fraction", c.validation_fraction );
  take( "threads", c.threads );
  take( "netlist_format", c.netlist_format );
  take( "calibration_mw_per_ge", c.calibration_mw_per_ge );
  validate_config( c );
  return c;
}

/*! \brief Largest weight fraction such that no coefficient saturates, so
 * scaling is lossless where the data allows and clamps only as a last
 * resort. Trees carry no weights; they get the maximal fraction.
 */
inline int fit_weight_fraction( trained_model const& m, int total_bits )
{
  double max_abs = 0.0;
  const auto consider = [&]( double w ) { max_abs = std::max( max_abs, std::abs( w ) ); };
  if ( m.is_mlp() )
  {
    for ( auto const& layer : m.mlp().layers )
    {
      for ( auto const& row : layer.weights )
      {
        for ( double w : row )
          consider( w );
      }
    }
  }
  else if ( std::holds_alternative<svm_body>( m.body ) )
  {
    for ( auto const& unit : m.svm().units )
    {
      for ( double w : unit.weights )
        consider( w );
    }
  }
  const int64_t max_code = ( int64_t{ 1 } << ( total_bits - 1 ) ) - 1;
  int fraction = total_bits - 1;
  while ( fraction > 0 &&
          std::llround( max_abs * std::ldexp( 1.0, fraction ) ) > max_code )
    --fraction;
  return fraction;
}

struct equivalence_result
{
  size_t rows = 0;
  size_t mismatches = 0;

  bool ok() const { return mismatches == 0; }
};

/*! \brief Compares circuit simulation against software inference on seeded
 * uniform input codes; the deliverable netlist must be bit-exact.
 */
inline equivalence_result check_equivalence( quantized_model const& q, netlist const& n, size_t rows, uint64_t seed,
                                             unsigned threads = 1 )
{
  std::mt19937_64 rng( derive_seed( seed, "flow/oracle" ) );
  std::uniform_int_distribution<int64_t> code( 0, ( int64_t{ 1 } << q.input_format.total_bits ) - 1 );
  std::vector<std::vector<int64_t>> stimuli( rows, std::vector<int64_t>( static_cast<size_t>( q.input_count ) ) );
  for ( auto& row : stimuli )
  {
    for ( auto& v : row )
      v = code( rng );
  }
  const auto sim = simulate( n, stimuli, threads );
  equivalence_result r;
  r.rows = rows;
  for ( size_t i = 0; i < rows; ++i )
  {
    if ( sim[i][0] != infer_codes( q, stimuli[i] ).label )
      ++r.mismatches;
  }
  return r;
}

/*! \brief Label-port accuracy of a circuit against dataset labels. */
inline double netlist_accuracy( netlist const& n, std::vector<std::vector<int64_t>> const& stimuli,
                                std::vector<int> const& labels, unsigned threads = 1 )
{
  return detail::forced_accuracy( n, stimuli, labels, nullptr, threads );
}

struct flow_synth_result
{
  std::string id;
  quantized_model q;
  netlist circuit;
  dataset train;
  dataset test;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  eval_report report;
};

namespace detail
{

inline eval_report make_report( std::string const& id, std::string const& phase, double accuracy_test,
                                netlist const& n, std::vector<std::vector<int64_t>> const& test_stimuli,
                                flow_config const& cfg, unsigned threads )
{
  eval_report r;
  r.model_id = id;
  r.phase = phase;
  r.accuracy_test = accuracy_test;
  const auto ar = area( n );
  r.area_proxy = ar.gate_equivalents;
  r.power_proxy = power_proxy( ar, profile_activity( n, test_stimuli, threads ) );
  if ( cfg.calibration_mw_per_ge > 0.0 )
    r.battery = battery_check( r.power_proxy, cfg.calibration_mw_per_ge );
  return r;
}

} // namespace detail

/*! \brief Quantizes on the training part and synthesizes the exact
 * hardwired circuit; the report carries zero gains by definition.
 */
inline flow_synth_result run_synth( std::string const& id, trained_model const& m, dataset const& data,
                                    flow_config const& cfg )
{
  validate_config( cfg );
  auto parts = split( data, cfg.test_fraction, cfg.seed );
  const int wf = cfg.weight_fraction >= 0 ? cfg.weight_fraction : fit_weight_fraction( m, cfg.weight_bits );
  const fxp_format in_fmt{ cfg.input_bits, cfg.input_fraction, false };
  const fxp_format w_fmt{ cfg.weight_bits, wf, true };

  flow_synth_result r;
  r.id = id;
  r.q = quantize_model( m, in_fmt, w_fmt, parts.train );
  r.circuit = synth_model( r.q, id );
  r.train = std::move( parts.train );
  r.test = std::move( parts.test );
  r.train_accuracy = accuracy( r.q, r.train );
  r.test_accuracy = accuracy( r.q, r.test );
  r.report = detail::make_report( id, phase_exact, r.test_accuracy, r.circuit, stimulus_from( r.q, r.test ), cfg,
                                  cfg.threads );
  return r;
}

struct flow_approx_result
{
  flow_synth_result exact;
  quantized_model approx_q;
  replacement_plan plan;
  prune_result pruned;
  netlist circuit; /* the pruned deliverable */
  equivalence_result oracle;
  double test_accuracy = 0.0; /* of the pruned circuit, by simulation */
  eval_report report;
};

/*! \brief Coefficient approximation within the configured window, circuit
 * equivalence check on the re-synthesized model, then activity-ranked
 * pruning with the end-to-end training budget anchored at the exact
 * model's accuracy.
 */
inline flow_approx_result run_approx( std::string const& id, trained_model const& m, dataset const& data,
                                      flow_config const& cfg )
{
  flow_approx_result r;
  r.exact = run_synth( id, m, data, cfg );

  auto approx = approximate_sums( r.exact.q, r.exact.train, cfg.delta, cfg.accuracy_budget_pp );
  r.approx_q = std::move( approx.model );
  r.plan = std::move( approx.plan );

  const auto resynth = synth_model( r.approx_q, id );
  r.oracle = check_equivalence( r.approx_q, resynth, 1000, cfg.seed, cfg.threads );

  const auto train_stimuli = stimulus_from( r.approx_q, r.exact.train );
  r.pruned = prune( resynth, train_stimuli, r.exact.train.labels, cfg.accuracy_budget_pp, cfg.prune_batch,
                    cfg.threads, r.exact.train_accuracy );
  r.circuit = r.pruned.n;

  const auto test_stimuli = stimulus_from( r.approx_q, r.exact.test );
  r.test_accuracy = netlist_accuracy( r.circuit, test_stimuli, r.exact.test.labels, cfg.threads );
  r.report = detail::make_report( id, phase_approximated, r.test_accuracy, r.circuit, test_stimuli, cfg,
                                  cfg.threads );
  r.report.area_gain_pct = gain_pct( r.exact.report.area_proxy, r.report.area_proxy );
  r.report.power_gain_pct = gain_pct( r.exact.report.power_proxy, r.report.power_proxy );
  r.report.oracle_equivalent = r.oracle.ok();
  return r;
}

struct flow_evolve_result
{
  flow_synth_result exact;
  dataset core;       /* training minus the validation part */
  dataset validation; /* drives the search's loss objective */
  dt_evolve_result search;
  quantized_model selected_q;
  netlist circuit;
  equivalence_result oracle;
  double test_accuracy = 0.0;
  double proxy_gain_pct = 0.0; /* comparator-area proxy vs the exact genome */
  eval_report report;
};

/*! \brief Comparator threshold / precision search for trees: the loss
 * objective is measured on a validation carve-out of the training part, the
 * selected configuration is re-synthesized and equivalence checked, and
 * reporting happens on the held-out test part.
 */
inline flow_evolve_result run_evolve( std::string const& id, trained_model const& m, dataset const& data,
                                      flow_config const& cfg )
{
  flow_evolve_result r;
  r.exact = run_synth( id, m, data, cfg );

  auto inner = split( r.exact.train, cfg.validation_fraction, derive_seed( cfg.seed, "flow/validation" ) );
  r.core = std::move( inner.train );
  r.validation = std::move( inner.test );

  dt_evolve_params params;
  params.population = cfg.population;
  params.generations = cfg.generations;
  params.seed = derive_seed( cfg.seed, "flow/evolve" );
  params.crossover_p = cfg.crossover_p;
  params.mutation_p = cfg.mutation_p;
  params.threshold_delta = cfg.delta;
  params.loss_budget_pp = cfg.accuracy_budget_pp;
  params.threads = cfg.threads;
  r.search = evolve( r.exact.q, r.core, r.validation, params );

  r.selected_q = apply_genome( r.exact.q, r.search.selected_genome );
  r.circuit = synth_model( r.selected_q, id );
  r.oracle = check_equivalence( r.selected_q, r.circuit, 1000, cfg.seed, cfg.threads );
  r.proxy_gain_pct = gain_pct( r.search.baseline_area, r.search.selected_area );

  r.test_accuracy = accuracy( r.selected_q, r.exact.test );
  r.report = detail::make_report( id, phase_approximated, r.test_accuracy, r.circuit,
                                  stimulus_from( r.selected_q, r.exact.test ), cfg, cfg.threads );
  r.report.area_gain_pct = gain_pct( r.exact.report.area_proxy, r.report.area_proxy );
  r.report.power_gain_pct = gain_pct( r.exact.report.power_proxy, r.report.power_proxy );
  r.report.oracle_equivalent = r.oracle.ok();
  return r;
}

namespace detail
{

inline void write_text( std::string const& path, std::string const& content )
{
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw validation_error( path, "cannot open output file" );
  out << content;
}

inline std::string netlist_path( std::string const& out_dir, std::string const& id, std::string const& phase,
                                 std::string const& format )
{
  return out_dir + "/" + id + "_" + phase + ( format == "verilog" ? ".v" : ".json" );
}

inline void write_netlist( netlist const& n, std::string const& path, std::string const& format )
{
  if ( format == "verilog" )
    save_netlist_verilog( n, path );
  else
    save_netlist_json( n, path );
}

inline void write_json( std::string const& path, nlohmann::json const& j )
{
  write_text( path, j.dump( 2 ) + "\n" );
}

} // namespace detail

/*! \brief Exit status contract shared by every command. */
inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_not_equivalent = 3;

/*! \brief Writes the exact circuit and its report. */
inline int cmd_synth( std::string const& id, trained_model const& m, dataset const& data, flow_config const& cfg,
                      std::string const& out_dir )
{
  std::filesystem::create_directories( out_dir );
  const auto r = run_synth( id, m, data, cfg );
  detail::write_netlist( r.circuit, detail::netlist_path( out_dir, id, "exact", cfg.netlist_format ),
                         cfg.netlist_format );
  detail::write_json( out_dir + "/" + id + "_exact_report.json", report_to_json( r.report ) );
  return exit_ok;
}

/*! \brief Writes exact and approximated circuits, the adoption plan, the
 * prune log, and both reports. Nonzero status when the re-synthesized
 * model's circuit disagrees with software inference.
 */
inline int cmd_approx( std::string const& id, trained_model const& m, dataset const& data, flow_config const& cfg,
                       std::string const& out_dir )
{
  std::filesystem::create_directories( out_dir );
  const auto r = run_approx( id, m, data, cfg );
  detail::write_netlist( r.exact.circuit, detail::netlist_path( out_dir, id, "exact", cfg.netlist_format ),
                         cfg.netlist_format );
  detail::write_netlist( r.circuit, detail::netlist_path( out_dir, id, "approx", cfg.netlist_format ),
                         cfg.netlist_format );
  detail::write_json( out_dir + "/" + id + "_plan.json", plan_to_json( r.plan ) );
  detail::write_json( out_dir + "/" + id + "_prune_log.json", prune_log_to_json( r.pruned ) );
  detail::write_json( out_dir + "/" + id + "_exact_report.json", report_to_json( r.exact.report ) );
  detail::write_json( out_dir + "/" + id + "_approx_report.json", report_to_json( r.report ) );
  return r.oracle.ok() ? exit_ok : exit_not_equivalent;
}

/*! \brief Writes exact and selected circuits, the search front, the chosen
 * configuration, and both reports. Nonzero status when the selected
 * configuration's circuit disagrees with software inference.
 */
inline int cmd_evolve( std::string const& id, trained_model const& m, dataset const& data, flow_config const& cfg,
                       std::string const& out_dir )
{
  std::filesystem::create_directories( out_dir );
  const auto r = run_evolve( id, m, data, cfg );
  detail::write_netlist( r.exact.circuit, detail::netlist_path( out_dir, id, "exact", cfg.netlist_format ),
                         cfg.netlist_format );
  detail::write_netlist( r.circuit, detail::netlist_path( out_dir, id, "approx", cfg.netlist_format ),
                         cfg.netlist_format );
  detail::write_text( out_dir + "/" + id + "_pareto.csv", pareto_csv( r.search.front ) );
  auto config = selected_config_json( r.exact.q, r.search );
  config["proxy_gain_pct"] = r.proxy_gain_pct;
  detail::write_json( out_dir + "/" + id + "_selected.json", config );
  detail::write_json( out_dir + "/" + id + "_exact_report.json", report_to_json( r.exact.report ) );
  detail::write_json( out_dir + "/" + id + "_approx_report.json", report_to_json( r.report ) );
  return r.oracle.ok() ? exit_ok : exit_not_equivalent;
}

/*! \brief Evaluates the exact circuit without writing netlists. */
inline int cmd_eval( std::string const& id, trained_model const& m, dataset const& data, flow_config const& cfg,
                     std::string const& out_dir )
{
  std::filesystem::create_directories( out_dir );
  const auto r = run_synth( id, m, data, cfg );
  detail::write_json( out_dir + "/" + id + "_exact_report.json", report_to_json( r.report ) );
  return exit_ok;
}

/*! \brief Collects every report in `out_dir` into one summary table,
 * ordered by file name for stable output.
 */
inline int cmd_report( std::string const& out_dir )
{
  std::vector<std::string> paths;
  for ( auto const& entry : std::filesystem::directory_iterator( out_dir ) )
  {
    const auto name = entry.path().filename().string();
    if ( entry.is_regular_file() && name.size() > 12 && name.substr( name.size() - 12 ) == "_report.json" )
      paths.push_back( entry.path().string() );
  }
  std::sort( paths.begin(), paths.end() );
  std::vector<eval_report> reports;
  for ( auto const& path : paths )
  {
    std::ifstream in( path );
    if ( !in )
      throw validation_error( path, "cannot open report file" );
    nlohmann::json j;
    in >> j;
    reports.push_back( report_from_json( j ) );
  }
  detail::write_text( out_dir + "/summary.csv", summary_csv( reports ) );
  return exit_ok;
}

} // namespace bespoke
