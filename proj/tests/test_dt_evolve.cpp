/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

#include <catch2/catch_amalgamated.hpp>

#include <bespoke/dt_evolve.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace bespoke;

namespace
{

quantized_model tree_model( int features, int total_bits, std::vector<q_tree_node> nodes, int root, int classes )
{
  quantized_model q;
  q.kind = model_kind::decision_tree;
  q.input_count = features;
  q.class_count = classes;
  q.input_format = fxp_format{ total_bits, 0, false };
  q.weight_format = fxp_format{ 8, 0, true };
  q.scalers.assign( static_cast<size_t>( features ), input_scaler{ 1.0, 0.0, false } );
  for ( auto& n : nodes )
  {
    if ( !n.is_leaf() && n.compare_bits == 0 )
      n.compare_bits = total_bits;
  }
  q.body = q_tree_body{ std::move( nodes ), root };
  return q;
}

dataset data_from_codes( std::vector<std::vector<double>> rows, std::vector<int> labels, int features, int classes )
{
  dataset d;
  d.rows = std::move( rows );
  d.labels = std::move( labels );
  d.class_count = classes;
  d.feature_ranges.assign( static_cast<size_t>( features ), { 0.0, 255.0 } );
  return d;
}

/* three comparators over two features; labels 0..2 */
quantized_model wide_tree()
{
  std::vector<q_tree_node> nodes( 7 );
  nodes[0] = { 0, 100, 1, 2, -1, 0 };
  nodes[1] = { 1, 40, 3, 4, -1, 0 };
  nodes[2] = { 1, 200, 5, 6, -1, 0 };
  nodes[3].label = 0;
  nodes[4].label = 1;
  nodes[5].label = 1;
  nodes[6].label = 2;
  return tree_model( 2, 8, std::move( nodes ), 0, 3 );
}

double best_feasible_random_search( quantized_model const& q, dataset const& validation, dt_evolve_params const& p,
                                    size_t evaluations, uint64_t seed )
{
  const auto bounds = gene_bounds( q, p.threshold_delta );
  std::vector<std::vector<int64_t>> codes;
  for ( auto const& row : validation.rows )
    codes.push_back( quantize_inputs( q, row ) );
  size_t base_hits = 0;
  for ( size_t r = 0; r < codes.size(); ++r )
  {
    if ( infer_codes( q, codes[r] ).label == validation.labels[r] )
      ++base_hits;
  }
  const double base = static_cast<double>( base_hits ) / static_cast<double>( codes.size() );

  std::mt19937_64 rng( seed );
  comparator_area_cache memo;
  double best = std::numeric_limits<double>::infinity();
  for ( size_t e = 0; e < evaluations; ++e )
  {
    std::vector<dt_gene> genome( bounds.size() );
    for ( size_t g = 0; g < bounds.size(); ++g )
    {
      std::uniform_int_distribution<int64_t> thr( bounds[g].threshold_lo, bounds[g].threshold_hi );
      std::uniform_int_distribution<int> bits( 1, bounds[g].bits_hi );
      genome[g] = { thr( rng ), bits( rng ) };
    }
    const auto model = apply_genome( q, genome );
    size_t hits = 0;
    for ( size_t r = 0; r < codes.size(); ++r )
    {
      if ( infer_codes( model, codes[r] ).label == validation.labels[r] )
        ++hits;
    }
    const double loss = ( base - static_cast<double>( hits ) / static_cast<double>( codes.size() ) ) * 100.0;
    if ( loss <= p.loss_budget_pp )
      best = std::min( best, dt_area_proxy( genome, q, &memo ) );
  }
  return best;
}

} // namespace

TEST_CASE( "area proxy of all zero thresholds is zero" )
{
  const auto q = wide_tree();
  const std::vector<dt_gene> genome{ { 0, 8 }, { 0, 8 }, { 0, 8 } };
  CHECK( dt_area_proxy( genome, q ) == 0.0 );
}

TEST_CASE( "power of two threshold at matching width is a wire" )
{
  std::vector<q_tree_node> nodes( 3 );
  nodes[0] = { 0, 8, 1, 2, -1, 0 };
  nodes[1].label = 0;
  nodes[2].label = 1;
  const auto q = tree_model( 1, 4, std::move( nodes ), 0, 2 );
  CHECK( dt_area_proxy( { { 8, 4 } }, q ) == 0.0 );
  CHECK( logic_gate_count( synth_comparator( 8, 4 ) ) == 0 );
}

TEST_CASE( "truncating a comparator never increases its area" )
{
  comparator_area_cache memo;
  for ( int64_t t = 0; t < 256; ++t )
  {
    for ( int bits = 8; bits >= 2; --bits )
    {
      const double wide = memo.get( t >> ( 8 - bits ), bits );
      const double narrow = memo.get( t >> ( 8 - bits + 1 ), bits - 1 );
      REQUIRE( narrow <= wide );
    }
  }
}

TEST_CASE( "gene bounds clamp to the representable code range" )
{
  std::vector<q_tree_node> nodes( 5 );
  nodes[0] = { 0, 250, 1, 2, -1, 0 };
  nodes[1] = { 0, 3, 3, 4, -1, 0 };
  nodes[2].label = 0;
  nodes[3].label = 1;
  nodes[4].label = 0;
  const auto q = tree_model( 1, 8, std::move( nodes ), 0, 2 );
  const auto bounds = gene_bounds( q, 10 );
  REQUIRE( bounds.size() == 2 );
  CHECK( bounds[0].threshold_lo == 240 );
  CHECK( bounds[0].threshold_hi == 255 );
  CHECK( bounds[1].threshold_lo == 0 );
  CHECK( bounds[1].threshold_hi == 13 );
  CHECK( bounds[0].bits_hi == 8 );
  CHECK_THROWS_AS( gene_bounds( q, -1 ), validation_error );
}

TEST_CASE( "exact genome reproduces the model and applying it is identity" )
{
  const auto q = wide_tree();
  const auto genome = exact_genome( q );
  REQUIRE( genome.size() == 3 );
  CHECK( genome[0] == dt_gene{ 100, 8 } );
  CHECK( genome[1] == dt_gene{ 40, 8 } );
  CHECK( genome[2] == dt_gene{ 200, 8 } );
  const auto same = apply_genome( q, genome );
  for ( size_t i = 0; i < q.tree().nodes.size(); ++i )
  {
    CHECK( same.tree().nodes[i].threshold == q.tree().nodes[i].threshold );
    CHECK( same.tree().nodes[i].compare_bits == q.tree().nodes[i].compare_bits );
  }
  CHECK_THROWS_AS( apply_genome( q, { { 1, 8 } } ), validation_error );
  CHECK_THROWS_AS( apply_genome( q, { { 1, 8 }, { 1, 0 }, { 1, 8 } } ), validation_error );
  CHECK_THROWS_AS( apply_genome( q, { { 1, 9 }, { 1, 8 }, { 1, 8 } } ), validation_error );
}

TEST_CASE( "zero generations still return the seeded exact genome" )
{
  /* rows 100 and 101 straddle threshold 101; every threshold shift or bit
   * reduction misclassifies one of them, so the exact genome is the unique
   * zero-loss point */
  std::vector<q_tree_node> nodes( 3 );
  nodes[0] = { 0, 101, 1, 2, -1, 0 };
  nodes[1].label = 0;
  nodes[2].label = 1;
  const auto q = tree_model( 1, 8, std::move( nodes ), 0, 2 );
  const auto data = data_from_codes( { { 100.0 }, { 101.0 } }, { 0, 1 }, 1, 2 );

  dt_evolve_params p;
  p.population = 8;
  p.generations = 0;
  p.seed = 5;
  p.threshold_delta = 6;
  const auto r = evolve( q, data, data, p );

  CHECK( r.baseline_accuracy == 1.0 );
  CHECK( r.evaluations == 8 );
  bool found = false;
  for ( auto const& point : r.front )
  {
    if ( point.genome == exact_genome( q ) )
    {
      found = true;
      CHECK( point.accuracy_loss_pp == 0.0 );
      CHECK( point.area_proxy == r.baseline_area );
    }
  }
  CHECK( found );
  CHECK( r.selected_genome == exact_genome( q ) );
  CHECK( r.selected_loss_pp == 0.0 );
  CHECK( r.selected_area == r.baseline_area );
}

TEST_CASE( "returned front is mutually non dominated and objectives recompute" )
{
  const auto q = wide_tree();
  std::mt19937_64 rng( 404 );
  std::uniform_real_distribution<double> code( 0.0, 255.0 );
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for ( int r = 0; r < 80; ++r )
  {
    rows.push_back( { std::floor( code( rng ) ), std::floor( code( rng ) ) } );
    labels.push_back( infer( q, rows.back() ).label );
  }
  const auto data = data_from_codes( std::move( rows ), std::move( labels ), 2, 3 );

  dt_evolve_params p;
  p.population = 12;
  p.generations = 6;
  p.seed = 9;
  p.threshold_delta = 12;
  const auto r = evolve( q, data, data, p );

  REQUIRE( !r.front.empty() );
  for ( auto const& a : r.front )
  {
    for ( auto const& b : r.front )
    {
      if ( &a == &b )
        continue;
      CHECK_FALSE( dominates( { a.accuracy_loss_pp, a.area_proxy },
                              { b.accuracy_loss_pp, b.area_proxy } ) );
    }
  }
  for ( auto const& point : r.front )
  {
    CHECK( point.rank == 0 );
    const auto model = apply_genome( q, point.genome );
    const double acc = accuracy( model, data );
    CHECK( point.accuracy_loss_pp == Catch::Approx( ( r.baseline_accuracy - acc ) * 100.0 ).margin( 1e-12 ) );
    CHECK( point.area_proxy == Catch::Approx( dt_area_proxy( point.genome, q ) ).margin( 1e-12 ) );
  }
  CHECK( r.selected_loss_pp <= p.loss_budget_pp );
  CHECK( r.selected_area <= r.baseline_area );
}

TEST_CASE( "same seed and params give identical results at any thread count" )
{
  const auto q = wide_tree();
  std::mt19937_64 rng( 505 );
  std::uniform_real_distribution<double> code( 0.0, 255.0 );
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for ( int r = 0; r < 60; ++r )
  {
    rows.push_back( { std::floor( code( rng ) ), std::floor( code( rng ) ) } );
    labels.push_back( infer( q, rows.back() ).label );
  }
  const auto data = data_from_codes( std::move( rows ), std::move( labels ), 2, 3 );

  dt_evolve_params p;
  p.population = 10;
  p.generations = 5;
  p.seed = 21;
  p.threshold_delta = 10;
  const auto a = evolve( q, data, data, p );
  const auto b = evolve( q, data, data, p );
  dt_evolve_params p4 = p;
  p4.threads = 4;
  const auto c = evolve( q, data, data, p4 );

  const auto same = [&]( dt_evolve_result const& lhs, dt_evolve_result const& rhs ) {
    REQUIRE( lhs.front.size() == rhs.front.size() );
    for ( size_t i = 0; i < lhs.front.size(); ++i )
    {
      CHECK( lhs.front[i].genome == rhs.front[i].genome );
      CHECK( lhs.front[i].accuracy_loss_pp == rhs.front[i].accuracy_loss_pp );
      CHECK( lhs.front[i].area_proxy == rhs.front[i].area_proxy );
    }
    CHECK( lhs.selected_genome == rhs.selected_genome );
    CHECK( lhs.selected_area == rhs.selected_area );
    CHECK( lhs.selected_loss_pp == rhs.selected_loss_pp );
    CHECK( lhs.evaluations == rhs.evaluations );
    CHECK( pareto_csv( lhs.front ) == pareto_csv( rhs.front ) );
  };
  same( a, b );
  same( a, c );
}

TEST_CASE( "search is never worse than random sampling with equal budget" )
{
  const auto q = wide_tree();
  std::mt19937_64 rng( 606 );
  std::uniform_real_distribution<double> code( 0.0, 255.0 );
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for ( int r = 0; r < 70; ++r )
  {
    rows.push_back( { std::floor( code( rng ) ), std::floor( code( rng ) ) } );
    labels.push_back( infer( q, rows.back() ).label );
  }
  const auto data = data_from_codes( std::move( rows ), std::move( labels ), 2, 3 );

  double evolved = std::numeric_limits<double>::infinity();
  double sampled = std::numeric_limits<double>::infinity();
  for ( uint64_t seed : { 1u, 2u, 3u, 4u, 5u } )
  {
    dt_evolve_params p;
    p.population = 12;
    p.generations = 8;
    p.seed = seed;
    p.threshold_delta = 16;
    const auto r = evolve( q, data, data, p );
    REQUIRE( r.selected_loss_pp <= p.loss_budget_pp );
    evolved = std::min( evolved, r.selected_area );
    sampled = std::min( sampled, best_feasible_random_search( q, data, p, r.evaluations, seed * 31 + 7 ) );
  }
  CHECK( evolved <= sampled );
}

TEST_CASE( "parameter validation rejects malformed searches" )
{
  const auto q = wide_tree();
  const auto data = data_from_codes( { { 1.0, 2.0 } }, { 0 }, 2, 3 );
  dt_evolve_params p;
  p.population = 3;
  CHECK_THROWS_AS( evolve( q, data, data, p ), validation_error );
  p.population = 7;
  CHECK_THROWS_AS( evolve( q, data, data, p ), validation_error );
  p.population = 8;
  p.generations = -1;
  CHECK_THROWS_AS( evolve( q, data, data, p ), validation_error );
  p.generations = 1;
  p.crossover_p = 1.5;
  CHECK_THROWS_AS( evolve( q, data, data, p ), validation_error );
  p.crossover_p = 0.9;
  const auto empty = data_from_codes( {}, {}, 2, 3 );
  CHECK_THROWS_AS( evolve( q, data, empty, p ), validation_error );
  CHECK_THROWS_AS( evolve( q, empty, data, p ), validation_error );
}

TEST_CASE( "front export and selected configuration round trip" )
{
  const auto q = wide_tree();
  std::mt19937_64 rng( 707 );
  std::uniform_real_distribution<double> code( 0.0, 255.0 );
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for ( int r = 0; r < 50; ++r )
  {
    rows.push_back( { std::floor( code( rng ) ), std::floor( code( rng ) ) } );
    labels.push_back( infer( q, rows.back() ).label );
  }
  const auto data = data_from_codes( std::move( rows ), std::move( labels ), 2, 3 );

  dt_evolve_params p;
  p.population = 8;
  p.generations = 3;
  p.seed = 13;
  p.threshold_delta = 8;
  const auto r = evolve( q, data, data, p );

  const auto csv = pareto_csv( r.front );
  REQUIRE( csv.rfind( "genome-hash,accuracy_loss_pp,area_proxy,rank\n", 0 ) == 0 );
  size_t lines = 0;
  for ( char ch : csv )
    lines += ch == '\n' ? 1 : 0;
  CHECK( lines == r.front.size() + 1 );
  const auto first_row = csv.substr( csv.find( '\n' ) + 1 );
  CHECK( first_row.find( ',' ) == 16 ); /* 64-bit hash in hex */

  const auto j = selected_config_json( q, r );
  CHECK( j["model"] == "decision_tree" );
  REQUIRE( j["nodes"].size() == 3 );
  CHECK( j["accuracy_loss_pp"].get<double>() == r.selected_loss_pp );
  CHECK( j["area_proxy"].get<double>() == r.selected_area );
  CHECK( genome_from_config_json( q, j ) == r.selected_genome );

  auto broken = j;
  broken["nodes"][0]["node"] = 6;
  CHECK_THROWS_AS( genome_from_config_json( q, broken ), validation_error );
}
