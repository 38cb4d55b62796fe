/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file synth.hpp
  \brief Model-to-netlist synthesis: constant multipliers, constant
  comparators, adder trees, argmax/vote logic

  Every arithmetic word carries its exact value interval, and widths are
  chosen from those intervals, so no datapath can overflow. Coefficients are
  hardwired: multipliers decompose constants into canonical signed digits,
  comparators fold a generic magnitude comparator against a constant
  operand.
*/

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "builder.hpp"
#include "csd.hpp"
#include "errors.hpp"
#include "netlist.hpp"
#include "quantized.hpp"

namespace bespoke
{

/*! \brief A bit-vector value under construction, least significant first,
 * with its exact attainable interval. Signed words are two's complement.
 */
struct word
{
  std::vector<nref> bits;
  bool is_signed = false;
  int64_t lo = 0;
  int64_t hi = 0;
};

/*! \brief Smallest width whose two's-complement (lo < 0) or unsigned range
 * contains [lo, hi].
 */
inline int width_for( int64_t lo, int64_t hi )
{
  assert( lo <= hi );
  for ( int w = 1; w < 63; ++w )
  {
    const int64_t wlo = lo < 0 ? -( int64_t{ 1 } << ( w - 1 ) ) : 0;
    const int64_t whi = lo < 0 ? ( int64_t{ 1 } << ( w - 1 ) ) - 1 : ( int64_t{ 1 } << w ) - 1;
    if ( lo >= wlo && hi <= whi )
      return w;
  }
  throw validation_error( "width", "interval exceeds 62 bits" );
}

/*! \brief Word-level datapath operations over a circuit_builder. */
class datapath
{
public:
  explicit datapath( circuit_builder& b ) : b_( b ) {}

  word constant_word( int64_t v ) const
  {
    word w;
    w.lo = w.hi = v;
    w.is_signed = v < 0;
    const int width = width_for( v, v );
    for ( int i = 0; i < width; ++i )
      w.bits.push_back( const_of( ( v >> i ) & 1 ) );
    return w;
  }

  static word from_bits( std::vector<nref> bits, bool is_signed, int64_t lo, int64_t hi )
  {
    word w;
    w.bits = std::move( bits );
    w.is_signed = is_signed;
    w.lo = lo;
    w.hi = hi;
    return w;
  }

  /*! \brief Bit i with implicit sign- or zero-extension. */
  static nref bit_at( word const& w, size_t i )
  {
    if ( i < w.bits.size() )
      return w.bits[i];
    return w.is_signed ? w.bits.back() : const_of( false );
  }

  word add( word const& a, word const& b ) { return add_sub( a, b, false ); }

  word sub( word const& a, word const& b ) { return add_sub( a, b, true ); }

  word negate( word const& a ) { return sub( constant_word( 0 ), a ); }

  word shift_left( word const& a, int k )
  {
    if ( k == 0 )
      return a;
    word w;
    w.is_signed = a.is_signed;
    w.lo = checked_shift( a.lo, k );
    w.hi = checked_shift( a.hi, k );
    w.bits.assign( static_cast<size_t>( k ), const_of( false ) );
    w.bits.insert( w.bits.end(), a.bits.begin(), a.bits.end() );
    return w;
  }

  /*! \brief Drops the s low bits: the arithmetic shift a >> s. */
  word truncate_low( word const& a, int s )
  {
    if ( s == 0 )
      return a;
    word w;
    w.is_signed = a.is_signed;
    w.lo = a.lo >> s;
    w.hi = a.hi >> s;
    const size_t width = static_cast<size_t>( std::max<int64_t>( 1, static_cast<int64_t>( a.bits.size() ) - s ) );
    for ( size_t i = 0; i < width; ++i )
      w.bits.push_back( bit_at( a, static_cast<size_t>( s ) + i ) );
    return w;
  }

  /*! \brief max(a, 0): every value bit gated by the complement of the sign. */
  word relu( word const& a )
  {
    if ( a.lo >= 0 )
      return a;
    if ( a.hi <= 0 )
      return constant_word( 0 );
    const nref keep = b_.create_not( sign_bit( a ) );
    word w;
    w.is_signed = false;
    w.lo = 0;
    w.hi = a.hi;
    const int width = width_for( 0, a.hi );
    for ( int i = 0; i < width; ++i )
      w.bits.push_back( b_.create_and( bit_at( a, static_cast<size_t>( i ) ), keep ) );
    return w;
  }

  word mux_word( nref sel, word const& d0, word const& d1 )
  {
    word w;
    w.lo = std::min( d0.lo, d1.lo );
    w.hi = std::max( d0.hi, d1.hi );
    w.is_signed = w.lo < 0;
    const int width = width_for( w.lo, w.hi );
    for ( int i = 0; i < width; ++i )
      w.bits.push_back( b_.create_mux( sel, bit_at( d0, static_cast<size_t>( i ) ), bit_at( d1, static_cast<size_t>( i ) ) ) );
    return w;
  }

  /*! \brief 1 when the value is negative; constant 0 for unsigned words. */
  nref sign_bit( word const& a ) const
  {
    if ( !a.is_signed )
      return const_of( false );
    return a.bits.back();
  }

  /*! \brief Generic unsigned magnitude comparator [x >= t] folded against
   * the constant operand: per bit, gt = x & ~t, eq = x xnor t, and the
   * chain ge_b = gt | (eq & ge_below) from the least significant bit up.
   */
  nref compare_ge( std::span<const nref> x, uint64_t t )
  {
    if ( x.size() < 64 && t >= ( uint64_t{ 1 } << x.size() ) )
      return const_of( false );
    nref ge = const_of( true );
    for ( size_t b = 0; b < x.size(); ++b )
    {
      const nref tb = const_of( ( t >> b ) & 1 );
      const nref gt = b_.create_and( x[b], b_.create_not( tb ) );
      const nref eq = b_.create_xnor( x[b], tb );
      ge = b_.create_or( gt, b_.create_and( eq, ge ) );
    }
    return ge;
  }

  /*! \brief [a >= b] over signed or unsigned words via a - b. */
  nref compare_ge_words( word const& a, word const& b )
  {
    word diff = sub( a, b );
    return b_.create_not( sign_bit( diff ) );
  }

  /*! \brief Shift-add multiplier for the constant c; one adder stage per
   * combine, max(nnz(csd)-1, 0) in total. A trailing negation (all digits
   * negative) is wiring plus one subtractor-from-zero, not a stage.
   */
  word mul_const( word const& x, int64_t c, int* adder_stages = nullptr )
  {
    int stages = 0;
    word result;
    if ( c == 0 )
    {
      result = constant_word( 0 );
    }
    else
    {
      std::vector<word> pos;
      std::vector<word> neg;
      for ( auto const& term : to_csd( c ) )
        ( term.negative ? neg : pos ).push_back( shift_left( x, term.shift ) );
      const auto fold = [&]( std::vector<word> terms ) {
        while ( terms.size() > 1 )
        {
          std::vector<word> next;
          for ( size_t i = 0; i + 1 < terms.size(); i += 2 )
          {
            next.push_back( add( terms[i], terms[i + 1] ) );
            ++stages;
          }
          if ( terms.size() % 2 )
            next.push_back( terms.back() );
          terms = std::move( next );
        }
        return terms.front();
      };
      if ( neg.empty() )
      {
        result = fold( std::move( pos ) );
      }
      else if ( pos.empty() )
      {
        result = negate( fold( std::move( neg ) ) ); /* negator, not a stage */
      }
      else
      {
        result = sub( fold( std::move( pos ) ), fold( std::move( neg ) ) );
        ++stages;
      }
    }
    if ( adder_stages )
      *adder_stages = stages;
    return result;
  }

  /*! \brief Balanced fold of a term list into one sum. */
  word sum( std::vector<word> terms )
  {
    if ( terms.empty() )
      return constant_word( 0 );
    while ( terms.size() > 1 )
    {
      std::vector<word> next;
      for ( size_t i = 0; i + 1 < terms.size(); i += 2 )
        next.push_back( add( terms[i], terms[i + 1] ) );
      if ( terms.size() % 2 )
        next.push_back( terms.back() );
      terms = std::move( next );
    }
    return terms.front();
  }

  /*! \brief Zero-extended slice of the given width; the value must fit. */
  static word slice_unsigned( word const& a, int width )
  {
    word w;
    w.is_signed = false;
    w.lo = 0;
    w.hi = ( int64_t{ 1 } << width ) - 1;
    for ( int i = 0; i < width; ++i )
      w.bits.push_back( bit_at( a, static_cast<size_t>( i ) ) );
    return w;
  }

private:
  static int64_t checked_shift( int64_t v, int k )
  {
    const __int128 r = static_cast<__int128>( v ) << k;
    if ( r > std::numeric_limits<int64_t>::max() || r < std::numeric_limits<int64_t>::min() )
      throw validation_error( "shift", "interval exceeds 64 bits" );
    return static_cast<int64_t>( r );
  }

  word add_sub( word const& a, word const& b, bool subtract )
  {
    const __int128 lo128 = static_cast<__int128>( a.lo ) + ( subtract ? -static_cast<__int128>( b.hi ) : static_cast<__int128>( b.lo ) );
    const __int128 hi128 = static_cast<__int128>( a.hi ) + ( subtract ? -static_cast<__int128>( b.lo ) : static_cast<__int128>( b.hi ) );
    if ( lo128 < std::numeric_limits<int64_t>::min() || hi128 > std::numeric_limits<int64_t>::max() )
      throw validation_error( "datapath", "accumulator interval exceeds 64 bits" );
    word w;
    w.lo = static_cast<int64_t>( lo128 );
    w.hi = static_cast<int64_t>( hi128 );
    w.is_signed = w.lo < 0;
    const int width = width_for( w.lo, w.hi );

    nref carry = const_of( subtract );
    for ( int i = 0; i < width; ++i )
    {
      const nref x = bit_at( a, static_cast<size_t>( i ) );
      nref y = bit_at( b, static_cast<size_t>( i ) );
      if ( subtract )
        y = b_.create_not( y );
      const nref xy = b_.create_xor( x, y );
      w.bits.push_back( b_.create_xor( xy, carry ) );
      carry = b_.create_or( b_.create_and( x, y ), b_.create_and( xy, carry ) );
    }
    return w;
  }

  circuit_builder& b_;
};

struct const_mult_netlist
{
  netlist n;
  int adder_stages = 0;
};

/*! \brief Standalone c*x multiplier over an in_bits-wide input. */
inline const_mult_netlist synth_const_mult( int64_t c, int in_bits, bool in_signed )
{
  circuit_builder b( "const_mult" );
  datapath dp( b );
  auto bits = b.add_input_port( "x", static_cast<size_t>( in_bits ), in_signed );
  const int64_t xlo = in_signed ? -( int64_t{ 1 } << ( in_bits - 1 ) ) : 0;
  const int64_t xhi = in_signed ? ( int64_t{ 1 } << ( in_bits - 1 ) ) - 1 : ( int64_t{ 1 } << in_bits ) - 1;
  const word x = datapath::from_bits( std::move( bits ), in_signed, xlo, xhi );
  const_mult_netlist out;
  const word p = dp.mul_const( x, c, &out.adder_stages );
  b.add_output_port( "p", p.bits, p.is_signed );
  out.n = b.finish();
  return out;
}

/*! \brief Standalone [x >= t] comparator over an unsigned in_bits input. */
inline netlist synth_comparator( uint64_t t, int in_bits )
{
  if ( in_bits < 1 || in_bits >= 63 || t >= ( uint64_t{ 1 } << in_bits ) )
    throw validation_error( "comparator", "threshold outside the input range" );
  circuit_builder b( "const_ge" );
  datapath dp( b );
  auto bits = b.add_input_port( "x", static_cast<size_t>( in_bits ), false );
  std::vector<nref> x( bits.begin(), bits.end() );
  const nref ge = dp.compare_ge( x, t );
  b.add_output_port( "ge", { ge }, false );
  return b.finish();
}

namespace detail
{

/*! \brief One weighted-sum unit: products of input words by constant row
 * weights, plus a bias term, balanced-folded.
 */
inline word weighted_sum( datapath& dp, std::vector<word> const& ins, std::vector<int64_t> const& weights,
                          int64_t bias )
{
  std::vector<word> terms;
  for ( size_t i = 0; i < weights.size(); ++i )
  {
    if ( weights[i] != 0 )
      terms.push_back( dp.mul_const( ins[i], weights[i] ) );
  }
  if ( bias != 0 || terms.empty() )
    terms.push_back( dp.constant_word( bias ) );
  return dp.sum( std::move( terms ) );
}

/*! \brief Linear-scan argmax with strict improvement: ties keep the lowest
 * index, matching the software reference.
 */
inline word argmax_word( datapath& dp, std::vector<word> const& values )
{
  word best_val = values[0];
  word best_idx = dp.constant_word( 0 );
  for ( size_t j = 1; j < values.size(); ++j )
  {
    /* take iff values[j] > best_val, i.e. best_val - values[j] < 0 */
    word diff = dp.sub( best_val, values[j] );
    const nref take = dp.sign_bit( diff );
    best_val = dp.mux_word( take, best_val, values[j] );
    best_idx = dp.mux_word( take, best_idx, dp.constant_word( static_cast<int64_t>( j ) ) );
  }
  return best_idx;
}

/*! \brief Clamp of a possibly signed word into [0, top], as a label word. */
inline word clamp_label( datapath& dp, circuit_builder& b, word const& v, int64_t top )
{
  const int label_bits = width_for( 0, top );
  const nref negative = dp.sign_bit( v );
  std::vector<nref> value_bits( v.bits.begin(), v.bits.end() - ( v.is_signed ? 1 : 0 ) );
  nref over = dp.compare_ge( value_bits, static_cast<uint64_t>( top + 1 ) );
  over = b.create_and( over, b.create_not( negative ) );
  const word sliced = datapath::slice_unsigned( v, label_bits );
  word clamped = dp.mux_word( over, sliced, dp.constant_word( top ) );
  clamped = dp.mux_word( negative, clamped, dp.constant_word( 0 ) );
  clamped.lo = 0;
  clamped.hi = top;
  return clamped;
}

} // namespace detail

/*! \brief Full combinational classifier for a quantized model. The single
 * output port `label` matches `infer_codes` bit-exactly on every input.
 */
inline netlist synth_model( quantized_model const& q, std::string const& name = "model" )
{
  circuit_builder b( name );
  datapath dp( b );

  std::vector<word> features;
  for ( int i = 0; i < q.input_count; ++i )
  {
    auto bits = b.add_input_port( "x" + std::to_string( i ), static_cast<size_t>( q.input_format.total_bits ), false );
    features.push_back( datapath::from_bits( std::move( bits ), false, 0, q.input_format.max_code() ) );
  }
  const int64_t top = q.class_count - 1;
  const int label_bits = width_for( 0, top );

  word label;
  if ( q.is_mlp() )
  {
    std::vector<word> values = features;
    for ( auto const& layer : q.mlp().layers )
    {
      std::vector<word> outs;
      for ( size_t o = 0; o < layer.weights.size(); ++o )
      {
        word acc = detail::weighted_sum( dp, values, layer.weights[o], layer.bias[o] );
        outs.push_back( layer.act == activation::relu ? dp.relu( acc ) : acc );
      }
      values = std::move( outs );
    }
    if ( q.kind == model_kind::mlp_regressor )
    {
      word v = values[0];
      const int shift = q.mlp().layers.back().acc_fraction;
      if ( shift > 0 )
      {
        v = dp.add( v, dp.constant_word( int64_t{ 1 } << ( shift - 1 ) ) );
        v = dp.truncate_low( v, shift );
      }
      label = detail::clamp_label( dp, b, v, top );
    }
    else
    {
      label = detail::argmax_word( dp, values );
    }
  }
  else if ( q.is_svm() )
  {
    std::vector<std::vector<word>> votes( static_cast<size_t>( q.class_count ) );
    for ( auto const& unit : q.svm().units )
    {
      word acc = detail::weighted_sum( dp, features, unit.weights, unit.bias );
      const nref vote_pos = b.create_not( dp.sign_bit( acc ) );
      votes[static_cast<size_t>( unit.positive_class )].push_back(
          datapath::from_bits( { vote_pos }, false, 0, 1 ) );
      votes[static_cast<size_t>( unit.negative_class )].push_back(
          datapath::from_bits( { b.create_not( vote_pos ) }, false, 0, 1 ) );
    }
    std::vector<word> counts;
    for ( auto& v : votes )
      counts.push_back( dp.sum( std::move( v ) ) );
    label = detail::argmax_word( dp, counts );
  }
  else
  {
    auto const& t = q.tree();
    const int total_bits = q.input_format.total_bits;
    const auto emit = [&]( auto&& self, int at ) -> word {
      auto const& node = t.nodes[static_cast<size_t>( at )];
      if ( node.is_leaf() )
        return dp.constant_word( node.label );
      const int shift = total_bits - node.compare_bits;
      auto const& fbits = features[static_cast<size_t>( node.feature )].bits;
      std::vector<nref> x( fbits.begin() + shift, fbits.end() );
      const nref cmp = dp.compare_ge( x, static_cast<uint64_t>( node.threshold >> shift ) );
      const word left = self( self, node.left );
      const word right = self( self, node.right );
      return dp.mux_word( cmp, left, right );
    };
    label = emit( emit, t.root );
  }

  b.add_output_port( "label", datapath::slice_unsigned( label, label_bits ).bits, false );
  return const_propagate( b.finish() );
}

/*! \brief Input codes of a dataset row, as netlist stimulus. */
inline std::vector<std::vector<int64_t>> stimulus_from( quantized_model const& q, dataset const& data )
{
  std::vector<std::vector<int64_t>> rows;
  rows.reserve( data.size() );
  for ( auto const& row : data.rows )
    rows.push_back( quantize_inputs( q, row ) );
  return rows;
}

} // namespace bespoke
