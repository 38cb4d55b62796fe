/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file quantized.hpp
  \brief Fixed-point model mirror and the bit-exact inference reference

  The quantized model is the golden oracle: every synthesized netlist must
  reproduce its predictions bit-exactly. All accumulators are exact 64-bit
  integers; construction verifies that no value can overflow.
*/

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "dataset.hpp"
#include "errors.hpp"
#include "fixed_point.hpp"
#include "model.hpp"

namespace bespoke
{

/*! \brief Per-feature affine map from raw values into the model's input
 * domain: scaled = scale * x + offset, spanning [0, 1 - 2^-fraction_bits]
 * over the training range.
 */
struct input_scaler
{
  double scale = 0.0;
  double offset = 0.0;
  bool degenerate = false; /* training min == max; feature pinned to 0 */
};

struct q_mlp_layer
{
  std::vector<std::vector<int64_t>> weights; /* [out][in] stored codes */
  std::vector<int64_t> bias;                 /* codes at acc_fraction */
  activation act = activation::relu;
  int acc_fraction = 0; /* fraction bits of this layer's accumulators */
};

struct q_mlp_body
{
  std::vector<q_mlp_layer> layers;
};

struct q_svm_unit
{
  std::vector<int64_t> weights;
  int64_t bias = 0;
  int positive_class = 0;
  int negative_class = 0;
};

struct q_svm_body
{
  std::vector<q_svm_unit> units;
};

struct q_tree_node
{
  int feature = -1;
  int64_t threshold = 0; /* code in input_format */
  int left = -1;
  int right = -1;
  int label = -1;
  int compare_bits = 0; /* top bits of both operands used by the compare */

  bool is_leaf() const { return label >= 0; }
};

struct q_tree_body
{
  std::vector<q_tree_node> nodes;
  int root = 0;
};

struct prediction
{
  int label = 0;
  std::vector<int64_t> raw; /* final accumulators; empty for trees */
};

struct quantized_model
{
  model_kind kind = model_kind::decision_tree;
  int input_count = 0;
  int class_count = 0;
  fxp_format input_format;
  fxp_format weight_format;
  std::vector<input_scaler> scalers;
  std::variant<q_mlp_body, q_svm_body, q_tree_body> body;

  q_mlp_body const& mlp() const { return std::get<q_mlp_body>( body ); }
  q_mlp_body& mlp() { return std::get<q_mlp_body>( body ); }
  q_svm_body const& svm() const { return std::get<q_svm_body>( body ); }
  q_svm_body& svm() { return std::get<q_svm_body>( body ); }
  q_tree_body const& tree() const { return std::get<q_tree_body>( body ); }
  q_tree_body& tree() { return std::get<q_tree_body>( body ); }
  bool is_mlp() const { return std::holds_alternative<q_mlp_body>( body ); }
  bool is_svm() const { return std::holds_alternative<q_svm_body>( body ); }
  bool is_tree() const { return std::holds_alternative<q_tree_body>( body ); }
};

/*! \brief Fits one scaler per feature over the given training ranges. */
inline std::vector<input_scaler> fit_scalers( std::vector<std::pair<double, double>> const& ranges,
                                              fxp_format input_fmt )
{
  const double span_target = 1.0 - std::ldexp( 1.0, -input_fmt.fraction_bits );
  std::vector<input_scaler> scalers;
  scalers.reserve( ranges.size() );
  for ( auto const& [lo, hi] : ranges )
  {
    input_scaler s;
    if ( hi > lo )
    {
      s.scale = span_target / ( hi - lo );
      s.offset = -lo * s.scale;
    }
    else
    {
      s.degenerate = true;
    }
    scalers.push_back( s );
  }
  return scalers;
}

/*! \brief Closed integer interval; the value-range currency of width checks. */
struct value_interval
{
  int64_t lo = 0;
  int64_t hi = 0;
};

namespace detail
{

inline int64_t checked_mul_add( int64_t acc, int64_t w, int64_t x, char const* what )
{
  const __int128 r = static_cast<__int128>( acc ) + static_cast<__int128>( w ) * static_cast<__int128>( x );
  if ( r > std::numeric_limits<int64_t>::max() || r < std::numeric_limits<int64_t>::min() )
    throw validation_error( what, "accumulator exceeds 64 bits" );
  return static_cast<int64_t>( r );
}

struct wide_interval
{
  __int128 lo = 0;
  __int128 hi = 0;
};

inline wide_interval scale_interval( value_interval in, int64_t w )
{
  const __int128 a = static_cast<__int128>( in.lo ) * w;
  const __int128 b = static_cast<__int128>( in.hi ) * w;
  return w >= 0 ? wide_interval{ a, b } : wide_interval{ b, a };
}

} // namespace detail

/*! \brief Accumulator and post-activation intervals of every MLP/SVM unit.
 *
 * Entry [layer][unit] is exact: weights are hardwired constants, so interval
 * propagation from the input format's code range is tight.
 */
struct model_intervals
{
  std::vector<std::vector<value_interval>> acc;       /* pre-activation */
  std::vector<std::vector<value_interval>> activated; /* post-activation */
};

inline model_intervals compute_intervals( quantized_model const& q )
{
  model_intervals iv;
  const value_interval input_iv{ 0, q.input_format.max_code() };

  auto propagate = [&]( std::vector<std::vector<int64_t>> const& weights, std::vector<int64_t> const& bias,
                        std::vector<value_interval> const& in ) {
    std::vector<value_interval> out;
    out.reserve( weights.size() );
    for ( size_t o = 0; o < weights.size(); ++o )
    {
      __int128 lo = bias.empty() ? 0 : bias[o];
      __int128 hi = lo;
      for ( size_t i = 0; i < weights[o].size(); ++i )
      {
        const auto term = detail::scale_interval( in[i], weights[o][i] );
        lo += term.lo;
        hi += term.hi;
      }
      if ( lo < std::numeric_limits<int64_t>::min() || hi > std::numeric_limits<int64_t>::max() )
        throw validation_error( "model", "accumulator interval exceeds 64 bits" );
      out.push_back( { static_cast<int64_t>( lo ), static_cast<int64_t>( hi ) } );
    }
    return out;
  };

  if ( q.is_mlp() )
  {
    std::vector<value_interval> in( static_cast<size_t>( q.input_count ), input_iv );
    for ( auto const& layer : q.mlp().layers )
    {
      auto acc = propagate( layer.weights, layer.bias, in );
      std::vector<value_interval> act = acc;
      if ( layer.act == activation::relu )
      {
        for ( auto& v : act )
        {
          v.lo = std::max<int64_t>( v.lo, 0 );
          v.hi = std::max<int64_t>( v.hi, 0 );
        }
      }
      iv.acc.push_back( std::move( acc ) );
      iv.activated.push_back( act );
      in = std::move( act );
    }
  }
  else if ( q.is_svm() )
  {
    std::vector<value_interval> in( static_cast<size_t>( q.input_count ), input_iv );
    std::vector<std::vector<int64_t>> w;
    std::vector<int64_t> b;
    for ( auto const& unit : q.svm().units )
    {
      w.push_back( unit.weights );
      b.push_back( unit.bias );
    }
    auto acc = propagate( w, b, in );
    iv.acc.push_back( acc );
    iv.activated.push_back( std::move( acc ) );
  }
  return iv;
}

/*! \brief Quantizes a trained model: weights in `weight_fmt`, decision-tree
 * thresholds in `input_fmt`, biases at each layer's accumulator fraction.
 * Input scalers map each feature's training range onto [0, 1-2^-f].
 */
inline quantized_model quantize_model( trained_model const& m, fxp_format input_fmt, fxp_format weight_fmt,
                                       dataset const& train )
{
  if ( !input_fmt.valid() || input_fmt.is_signed )
    throw validation_error( "input_format", "inputs must be a valid unsigned format" );
  if ( !weight_fmt.valid() )
    throw validation_error( "weight_format", "invalid format" );
  if ( train.size() == 0 )
    throw validation_error( "train", "training data must be nonempty" );
  if ( train.feature_count() != static_cast<size_t>( m.input_count ) )
    throw validation_error( "train", "feature count does not match model inputs" );

  quantized_model q;
  q.kind = m.kind;
  q.input_count = m.input_count;
  q.class_count = m.class_count;
  q.input_format = input_fmt;
  q.weight_format = weight_fmt;

  q.scalers = fit_scalers( train.feature_ranges, input_fmt );

  if ( m.is_mlp() )
  {
    q_mlp_body body;
    int fraction = input_fmt.fraction_bits;
    for ( auto const& layer : m.mlp().layers )
    {
      q_mlp_layer ql;
      ql.act = layer.act;
      fraction += weight_fmt.fraction_bits;
      ql.acc_fraction = fraction;
      const fxp_format bias_fmt{ 62, fraction, true };
      for ( auto const& row : layer.weights )
      {
        std::vector<int64_t> qrow;
        qrow.reserve( row.size() );
        for ( double w : row )
          qrow.push_back( quantize_value( w, weight_fmt ) );
        ql.weights.push_back( std::move( qrow ) );
      }
      for ( double b : layer.bias )
        ql.bias.push_back( quantize_value( b, bias_fmt ) );
      body.layers.push_back( std::move( ql ) );
    }
    q.body = std::move( body );
  }
  else if ( std::holds_alternative<svm_body>( m.body ) )
  {
    q_svm_body body;
    const fxp_format bias_fmt{ 62, input_fmt.fraction_bits + weight_fmt.fraction_bits, true };
    for ( auto const& unit : m.svm().units )
    {
      q_svm_unit qu;
      qu.positive_class = unit.positive_class;
      qu.negative_class = unit.negative_class;
      for ( double w : unit.weights )
        qu.weights.push_back( quantize_value( w, weight_fmt ) );
      qu.bias = quantize_value( unit.bias, bias_fmt );
      body.units.push_back( std::move( qu ) );
    }
    q.body = std::move( body );
  }
  else
  {
    q_tree_body body;
    body.root = m.tree().root;
    for ( auto const& node : m.tree().nodes )
    {
      q_tree_node qn;
      qn.feature = node.feature;
      qn.left = node.left;
      qn.right = node.right;
      qn.label = node.label;
      qn.compare_bits = input_fmt.total_bits;
      if ( !node.is_leaf() )
        qn.threshold = quantize_value( node.threshold, input_fmt );
      body.nodes.push_back( qn );
    }
    q.body = std::move( body );
  }

  compute_intervals( q ); /* throws when any accumulator could overflow */
  return q;
}

/*! \brief Maps a raw feature row to input codes through the scalers. */
inline std::vector<int64_t> quantize_inputs( quantized_model const& q, std::span<const double> row )
{
  if ( row.size() != static_cast<size_t>( q.input_count ) )
    throw validation_error( "row", "feature count mismatch" );
  std::vector<int64_t> codes( row.size() );
  for ( size_t i = 0; i < row.size(); ++i )
  {
    auto const& s = q.scalers[i];
    codes[i] = s.degenerate ? 0 : quantize_value( s.scale * row[i] + s.offset, q.input_format );
  }
  return codes;
}

namespace detail
{

/*! \brief Rounded descale: floor((acc + 2^(s-1)) / 2^s), clamped to labels. */
inline int descale_label( int64_t acc, int shift, int class_count )
{
  int64_t v = acc;
  if ( shift > 0 )
    v = ( v + ( int64_t{ 1 } << ( shift - 1 ) ) ) >> shift;
  v = std::clamp<int64_t>( v, 0, class_count - 1 );
  return static_cast<int>( v );
}

inline int argmax_lowest( std::span<const int64_t> values )
{
  int best = 0;
  for ( size_t i = 1; i < values.size(); ++i )
  {
    if ( values[i] > values[best] )
      best = static_cast<int>( i );
  }
  return best;
}

} // namespace detail

/*! \brief Bit-exact fixed-point inference on pre-quantized input codes. */
inline prediction infer_codes( quantized_model const& q, std::span<const int64_t> codes )
{
  assert( codes.size() == static_cast<size_t>( q.input_count ) );
  prediction p;

  if ( q.is_mlp() )
  {
    std::vector<int64_t> values( codes.begin(), codes.end() );
    for ( auto const& layer : q.mlp().layers )
    {
      std::vector<int64_t> out( layer.weights.size() );
      for ( size_t o = 0; o < layer.weights.size(); ++o )
      {
        int64_t acc = layer.bias[o];
        for ( size_t i = 0; i < values.size(); ++i )
          acc = detail::checked_mul_add( acc, layer.weights[o][i], values[i], "mlp accumulator" );
        if ( layer.act == activation::relu )
          acc = std::max<int64_t>( acc, 0 );
        out[o] = acc;
      }
      values = std::move( out );
    }
    /* the last layer's activation is 'none'; values hold raw accumulators */
    p.raw = values;
    if ( q.kind == model_kind::mlp_regressor )
    {
      const int shift = q.mlp().layers.back().acc_fraction;
      p.label = detail::descale_label( values[0], shift, q.class_count );
    }
    else
    {
      p.label = detail::argmax_lowest( values );
    }
  }
  else if ( q.is_svm() )
  {
    std::vector<int64_t> votes( static_cast<size_t>( q.class_count ), 0 );
    p.raw.reserve( q.svm().units.size() );
    for ( auto const& unit : q.svm().units )
    {
      int64_t acc = unit.bias;
      for ( size_t i = 0; i < codes.size(); ++i )
        acc = detail::checked_mul_add( acc, unit.weights[i], codes[i], "svm accumulator" );
      p.raw.push_back( acc );
      ++votes[static_cast<size_t>( acc >= 0 ? unit.positive_class : unit.negative_class )];
    }
    p.label = detail::argmax_lowest( votes );
  }
  else
  {
    auto const& t = q.tree();
    int at = t.root;
    while ( !t.nodes[static_cast<size_t>( at )].is_leaf() )
    {
      auto const& node = t.nodes[static_cast<size_t>( at )];
      const int shift = q.input_format.total_bits - node.compare_bits;
      const int64_t x = codes[static_cast<size_t>( node.feature )] >> shift;
      const int64_t thr = node.threshold >> shift;
      at = x >= thr ? node.right : node.left;
    }
    p.label = t.nodes[static_cast<size_t>( at )].label;
  }
  return p;
}

inline prediction infer( quantized_model const& q, std::span<const double> row )
{
  const auto codes = quantize_inputs( q, row );
  return infer_codes( q, codes );
}

/*! \brief Fraction of rows whose fixed-point prediction matches the label. */
inline double accuracy( quantized_model const& q, dataset const& data )
{
  if ( data.size() == 0 )
    throw validation_error( "data", "accuracy over an empty dataset" );
  size_t hits = 0;
  for ( size_t i = 0; i < data.size(); ++i )
  {
    if ( infer( q, data.rows[i] ).label == data.labels[i] )
      ++hits;
  }
  return static_cast<double>( hits ) / static_cast<double>( data.size() );
}

/*! \brief Real-valued reference prediction: the same scalers and decision
 * conventions as the fixed-point path, with no rounding anywhere.
 */
inline int infer_float( trained_model const& m, std::span<const input_scaler> scalers, std::span<const double> row,
                        int class_count )
{
  std::vector<double> x( row.size() );
  for ( size_t i = 0; i < row.size(); ++i )
    x[i] = scalers[i].degenerate ? 0.0 : scalers[i].scale * row[i] + scalers[i].offset;

  if ( m.is_mlp() )
  {
    std::vector<double> values = x;
    for ( auto const& layer : m.mlp().layers )
    {
      std::vector<double> out( layer.output_width() );
      for ( size_t o = 0; o < layer.output_width(); ++o )
      {
        double acc = layer.bias[o];
        for ( size_t i = 0; i < values.size(); ++i )
          acc += layer.weights[o][i] * values[i];
        out[o] = layer.act == activation::relu ? std::max( acc, 0.0 ) : acc;
      }
      values = std::move( out );
    }
    if ( m.kind == model_kind::mlp_regressor )
    {
      const auto v = static_cast<int64_t>( std::floor( values[0] + 0.5 ) );
      return static_cast<int>( std::clamp<int64_t>( v, 0, class_count - 1 ) );
    }
    int best = 0;
    for ( size_t i = 1; i < values.size(); ++i )
    {
      if ( values[i] > values[best] )
        best = static_cast<int>( i );
    }
    return best;
  }
  if ( std::holds_alternative<svm_body>( m.body ) )
  {
    std::vector<int64_t> votes( static_cast<size_t>( class_count ), 0 );
    for ( auto const& unit : m.svm().units )
    {
      double acc = unit.bias;
      for ( size_t i = 0; i < x.size(); ++i )
        acc += unit.weights[i] * x[i];
      ++votes[static_cast<size_t>( acc >= 0.0 ? unit.positive_class : unit.negative_class )];
    }
    return detail::argmax_lowest( votes );
  }
  auto const& t = m.tree();
  int at = t.root;
  while ( !t.nodes[static_cast<size_t>( at )].is_leaf() )
  {
    auto const& node = t.nodes[static_cast<size_t>( at )];
    at = x[static_cast<size_t>( node.feature )] >= node.threshold ? node.right : node.left;
  }
  return t.nodes[static_cast<size_t>( at )].label;
}

/*! \brief Accuracy of the unrounded reference on `data`, using the given
 * scalers (typically taken from the quantized model so both paths share the
 * scaling fit on training data).
 */
inline double float_accuracy( trained_model const& m, dataset const& data, std::span<const input_scaler> scalers )
{
  size_t hits = 0;
  for ( size_t i = 0; i < data.size(); ++i )
  {
    if ( infer_float( m, scalers, data.rows[i], m.class_count ) == data.labels[i] )
      ++hits;
  }
  return static_cast<double>( hits ) / static_cast<double>( data.size() );
}

} // namespace bespoke
