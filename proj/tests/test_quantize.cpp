/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

#include <bespoke/quantized.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace bespoke;

namespace
{

const fxp_format in4{ 4, 4, false };
const fxp_format w8{ 8, 6, true };

dataset toy_data()
{
  dataset d;
  d.rows = { { 0.0, 3.0 }, { 5.0, 3.0 }, { 10.0, 3.0 } };
  d.labels = { 0, 1, 1 };
  d.feature_ranges = { { 0.0, 10.0 }, { 3.0, 3.0 } };
  d.class_count = 2;
  return d;
}

trained_model identity_mlp( double weight, model_kind kind )
{
  trained_model m;
  m.kind = kind;
  m.input_count = 1;
  m.class_count = 2;
  mlp_body body;
  body.layers.push_back( { { { weight } }, { 0.0 }, activation::none } );
  m.body = std::move( body );
  return m;
}

dataset unit_data( int features )
{
  dataset d;
  d.rows = { std::vector<double>( features, 0.0 ), std::vector<double>( features, 1.0 ) };
  d.labels = { 0, 1 };
  d.feature_ranges.assign( features, { 0.0, 1.0 } );
  d.class_count = 2;
  return d;
}

} // namespace

TEST_CASE( "input scalers span the training range" )
{
  trained_model m;
  m.kind = model_kind::mlp_regressor;
  m.input_count = 2;
  m.class_count = 2;
  mlp_body body;
  body.layers.push_back( { { { 1.0, 0.0 } }, { 0.0 }, activation::none } );
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, toy_data() );
  REQUIRE( q.scalers.size() == 2 );
  CHECK_FALSE( q.scalers[0].degenerate );
  CHECK( q.scalers[1].degenerate );

  const auto codes_lo = quantize_inputs( q, std::vector<double>{ 0.0, 3.0 } );
  const auto codes_mid = quantize_inputs( q, std::vector<double>{ 5.0, 3.0 } );
  const auto codes_hi = quantize_inputs( q, std::vector<double>{ 10.0, 3.0 } );
  CHECK( codes_lo == std::vector<int64_t>{ 0, 0 } );
  CHECK( codes_mid == std::vector<int64_t>{ 8, 0 } ); /* 7.5 rounds to even */
  CHECK( codes_hi == std::vector<int64_t>{ 15, 0 } );
}

TEST_CASE( "weight 1.0 stores as code 64 under six fraction bits" )
{
  const auto q = quantize_model( identity_mlp( 1.0, model_kind::mlp_regressor ), in4, w8, unit_data( 1 ) );
  CHECK( q.mlp().layers[0].weights[0][0] == 64 );
}

TEST_CASE( "identity datapath: code 5 in, raw 5 out" )
{
  /* weight value 2^-6 stores as code +1 */
  const auto q = quantize_model( identity_mlp( std::ldexp( 1.0, -6 ), model_kind::mlp_regressor ), in4, w8, unit_data( 1 ) );
  REQUIRE( q.mlp().layers[0].weights[0][0] == 1 );
  const auto p = infer_codes( q, std::vector<int64_t>{ 5 } );
  REQUIRE( p.raw.size() == 1 );
  CHECK( p.raw[0] == 5 );
  CHECK( p.label == 0 );
}

TEST_CASE( "bias fraction grows with depth" )
{
  trained_model m;
  m.kind = model_kind::mlp_classifier;
  m.input_count = 1;
  m.class_count = 2;
  mlp_body body;
  body.layers.push_back( { { { 1.0 } }, { 0.25 }, activation::relu } );
  body.layers.push_back( { { { 1.0 }, { -1.0 } }, { 0.25, 0.0 }, activation::none } );
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  CHECK( q.mlp().layers[0].acc_fraction == 10 );
  CHECK( q.mlp().layers[1].acc_fraction == 16 );
  CHECK( q.mlp().layers[0].bias[0] == 256 );   /* 0.25 * 2^10 */
  CHECK( q.mlp().layers[1].bias[0] == 16384 ); /* 0.25 * 2^16 */
}

TEST_CASE( "classifier argmax breaks ties toward the lowest index" )
{
  trained_model m;
  m.kind = model_kind::mlp_classifier;
  m.input_count = 1;
  m.class_count = 3;
  mlp_body body;
  body.layers.push_back( { { { 1.0 }, { 1.0 }, { 0.5 } }, { 0.0, 0.0, 0.0 }, activation::none } );
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  const auto p = infer_codes( q, std::vector<int64_t>{ 10 } );
  CHECK( p.raw[0] == p.raw[1] );
  CHECK( p.label == 0 );
}

TEST_CASE( "svm vote cycle resolves ties to class 0" )
{
  trained_model m;
  m.kind = model_kind::svm_classifier;
  m.input_count = 2;
  m.class_count = 3;
  svm_body body;
  body.units.push_back( { { 0.0, 0.0 }, 0.5, 0, 1 } ); /* votes 0 */
  body.units.push_back( { { 0.0, 0.0 }, 0.5, 2, 0 } ); /* votes 2 */
  body.units.push_back( { { 0.0, 0.0 }, 0.5, 1, 2 } ); /* votes 1 */
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 2 ) );
  const auto p = infer_codes( q, std::vector<int64_t>{ 3, 9 } );
  CHECK( p.label == 0 );
}

TEST_CASE( "svm zero accumulator counts as a positive vote" )
{
  trained_model m;
  m.kind = model_kind::svm_classifier;
  m.input_count = 1;
  m.class_count = 2;
  svm_body body;
  body.units.push_back( { { 0.0 }, 0.0, 1, 0 } );
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  CHECK( infer_codes( q, std::vector<int64_t>{ 0 } ).label == 1 );
}

TEST_CASE( "one-leaf tree always emits its label" )
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 1;
  m.class_count = 2;
  tree_body body;
  body.nodes.push_back( { -1, 0.0, -1, -1, 1 } );
  body.root = 0;
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  CHECK( infer_codes( q, std::vector<int64_t>{ 0 } ).label == 1 );
  CHECK( infer_codes( q, std::vector<int64_t>{ 15 } ).label == 1 );
}

TEST_CASE( "tree threshold at the feature maximum stays within the code range" )
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 1;
  m.class_count = 2;
  tree_body body;
  /* threshold at the top of the scaled domain, 1 - 2^-4 */
  body.nodes.push_back( { 0, 0.9375, 1, 2, -1 } );
  body.nodes.push_back( { -1, 0.0, -1, -1, 0 } );
  body.nodes.push_back( { -1, 0.0, -1, -1, 1 } );
  body.root = 0;
  m.body = std::move( body );
  const auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  CHECK( q.tree().nodes[0].threshold == 15 );
  CHECK( infer_codes( q, std::vector<int64_t>{ 15 } ).label == 1 );
  CHECK( infer_codes( q, std::vector<int64_t>{ 14 } ).label == 0 );
}

TEST_CASE( "tree comparisons honor reduced compare_bits" )
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 1;
  m.class_count = 2;
  tree_body body;
  body.nodes.push_back( { 0, 0.5625, 1, 2, -1 } ); /* code 9 */
  body.nodes.push_back( { -1, 0.0, -1, -1, 0 } );
  body.nodes.push_back( { -1, 0.0, -1, -1, 1 } );
  body.root = 0;
  m.body = std::move( body );
  auto q = quantize_model( m, in4, w8, unit_data( 1 ) );
  REQUIRE( q.tree().nodes[0].threshold == 9 );
  CHECK( infer_codes( q, std::vector<int64_t>{ 8 } ).label == 0 );

  /* with 2 compare bits both operands truncate to their top halves:
   * 8 >> 2 == 9 >> 2, so 8 now goes right */
  q.tree().nodes[0].compare_bits = 2;
  CHECK( infer_codes( q, std::vector<int64_t>{ 8 } ).label == 1 );
  CHECK( infer_codes( q, std::vector<int64_t>{ 7 } ).label == 0 );
}

TEST_CASE( "accuracy counts exact label matches" )
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 1;
  m.class_count = 2;
  tree_body body;
  body.nodes.push_back( { -1, 0.0, -1, -1, 0 } );
  body.root = 0;
  m.body = std::move( body );

  dataset d;
  d.rows = { { 0.1 }, { 0.2 }, { 0.3 }, { 0.4 }, { 0.5 } };
  d.labels = { 0, 0, 0, 1, 1 };
  d.feature_ranges = { { 0.1, 0.5 } };
  d.class_count = 2;

  const auto q = quantize_model( m, in4, w8, d );
  CHECK( accuracy( q, d ) == Catch::Approx( 0.6 ) );
}

TEST_CASE( "regressor output descales with rounding and clamps to labels" )
{
  /* weight code 64 (value 1.0): raw = 64 * x_code at fraction 10 */
  const auto q = quantize_model( identity_mlp( 1.0, model_kind::mlp_regressor ), in4, w8, unit_data( 1 ) );
  /* x_code 15: raw 960, descale (960 + 512) >> 10 = 1 */
  CHECK( infer_codes( q, std::vector<int64_t>{ 15 } ).label == 1 );
  /* x_code 7: raw 448, (448 + 512) >> 10 = 0 */
  CHECK( infer_codes( q, std::vector<int64_t>{ 7 } ).label == 0 );
  /* x_code 8: raw 512, (512 + 512) >> 10 = 1 */
  CHECK( infer_codes( q, std::vector<int64_t>{ 8 } ).label == 1 );
}

TEST_CASE( "accumulators match an arbitrary-precision recomputation" )
{
  std::mt19937_64 rng( 77 );
  std::uniform_real_distribution<double> wdist( -1.5, 1.5 );

  trained_model m;
  m.kind = model_kind::mlp_classifier;
  m.input_count = 6;
  m.class_count = 3;
  mlp_body body;
  mlp_layer l0;
  for ( int o = 0; o < 8; ++o )
  {
    std::vector<double> row;
    for ( int i = 0; i < 6; ++i )
      row.push_back( wdist( rng ) );
    l0.weights.push_back( row );
    l0.bias.push_back( wdist( rng ) );
  }
  l0.act = activation::relu;
  mlp_layer l1;
  for ( int o = 0; o < 3; ++o )
  {
    std::vector<double> row;
    for ( int i = 0; i < 8; ++i )
      row.push_back( wdist( rng ) );
    l1.weights.push_back( row );
    l1.bias.push_back( wdist( rng ) );
  }
  l1.act = activation::none;
  body.layers = { l0, l1 };
  m.body = std::move( body );

  const auto q = quantize_model( m, in4, { 8, 5, true }, unit_data( 6 ) );

  for ( int trial = 0; trial < 200; ++trial )
  {
    std::vector<int64_t> codes( 6 );
    for ( auto& c : codes )
      c = static_cast<int64_t>( rng() % 16 );

    /* independent wide-integer forward pass */
    std::vector<__int128> values( codes.begin(), codes.end() );
    for ( auto const& layer : q.mlp().layers )
    {
      std::vector<__int128> out;
      for ( size_t o = 0; o < layer.weights.size(); ++o )
      {
        __int128 acc = layer.bias[o];
        for ( size_t i = 0; i < values.size(); ++i )
          acc += static_cast<__int128>( layer.weights[o][i] ) * values[i];
        if ( layer.act == activation::relu && acc < 0 )
          acc = 0;
        out.push_back( acc );
      }
      values = std::move( out );
    }

    const auto p = infer_codes( q, codes );
    REQUIRE( p.raw.size() == values.size() );
    for ( size_t i = 0; i < values.size(); ++i )
      REQUIRE( static_cast<__int128>( p.raw[i] ) == values[i] );
  }
}

TEST_CASE( "interval analysis rejects models that could overflow" )
{
  trained_model m = identity_mlp( std::ldexp( 1.0, 60 ), model_kind::mlp_regressor );
  CHECK_THROWS_AS( quantize_model( m, in4, fxp_format{ 62, 0, true }, unit_data( 1 ) ), validation_error );
}

TEST_CASE( "float reference agrees with exact fixed point on a separable toy" )
{
  trained_model m;
  m.kind = model_kind::decision_tree;
  m.input_count = 1;
  m.class_count = 2;
  tree_body body;
  body.nodes.push_back( { 0, 0.46875, 1, 2, -1 } );
  body.nodes.push_back( { -1, 0.0, -1, -1, 0 } );
  body.nodes.push_back( { -1, 0.0, -1, -1, 1 } );
  body.root = 0;
  m.body = std::move( body );

  dataset d;
  for ( int i = 0; i <= 10; ++i )
  {
    d.rows.push_back( { static_cast<double>( i ) } );
    d.labels.push_back( i >= 5 ? 1 : 0 );
  }
  d.feature_ranges = { { 0.0, 10.0 } };
  d.class_count = 2;

  const auto q = quantize_model( m, in4, w8, d );
  CHECK( accuracy( q, d ) == Catch::Approx( float_accuracy( m, d, q.scalers ) ).margin( 1e-12 ) );
}
