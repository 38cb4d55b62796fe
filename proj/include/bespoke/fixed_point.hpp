/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file fixed_point.hpp
  \brief Fixed-point formats and scalar quantization
*/

#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>

namespace bespoke
{

/*! \brief A fixed-point format: stored integer times 2^-fraction_bits.
 *
 * Signed formats are two's complement. The representable code range is
 * [-2^(total_bits-1), 2^(total_bits-1)-1] when signed and [0, 2^total_bits-1]
 * otherwise.
 */
struct fxp_format
{
  int total_bits = 8;
  int fraction_bits = 0;
  bool is_signed = true;

  bool valid() const
  {
    return total_bits >= 1 && total_bits <= 62 && fraction_bits >= 0 &&
           fraction_bits <= total_bits - ( is_signed ? 1 : 0 );
  }

  int64_t min_code() const { return is_signed ? -( int64_t{ 1 } << ( total_bits - 1 ) ) : 0; }

  int64_t max_code() const
  {
    return is_signed ? ( int64_t{ 1 } << ( total_bits - 1 ) ) - 1 : ( int64_t{ 1 } << total_bits ) - 1;
  }

  double resolution() const { return std::ldexp( 1.0, -fraction_bits ); }

  bool operator==( fxp_format const& ) const = default;
};

/*! \brief Quantizes a real to the nearest code: round-to-nearest-even of
 * x*2^fraction_bits, saturated to the format's range.
 */
inline int64_t quantize_value( double x, fxp_format const& fmt )
{
  assert( fmt.valid() );
  if ( std::isnan( x ) )
  {
    return 0;
  }
  const double scaled = std::ldexp( x, fmt.fraction_bits );
  double r = std::nearbyint( scaled ); /* default FP mode: ties to even */
  if ( r < static_cast<double>( fmt.min_code() ) )
  {
    return fmt.min_code();
  }
  if ( r > static_cast<double>( fmt.max_code() ) )
  {
    return fmt.max_code();
  }
  return static_cast<int64_t>( r );
}

/*! \brief Real value represented by a stored code. */
inline double dequantize( int64_t code, fxp_format const& fmt )
{
  return std::ldexp( static_cast<double>( code ), -fmt.fraction_bits );
}

/*! \brief Largest fraction width (<= the format maximum) under which every
 * value in `values` quantizes without saturation; 0 when even that clips.
 */
inline int fit_fraction_bits( std::span<const double> values, int total_bits, bool is_signed )
{
  const int max_fraction = total_bits - ( is_signed ? 1 : 0 );
  for ( int f = max_fraction; f > 0; --f )
  {
    const fxp_format fmt{ total_bits, f, is_signed };
    bool ok = true;
    for ( double v : values )
    {
      const double scaled = std::nearbyint( std::ldexp( v, f ) );
      if ( scaled < static_cast<double>( fmt.min_code() ) || scaled > static_cast<double>( fmt.max_code() ) )
      {
        ok = false;
        break;
      }
    }
    if ( ok )
    {
      return f;
    }
  }
  return 0;
}

} // namespace bespoke
