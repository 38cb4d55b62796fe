/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file csd.hpp
  \brief Canonical signed digit recoding of integer constants

  A constant c is recoded into digits d_i in {-1, 0, +1} with
  c = sum d_i * 2^i and no two adjacent nonzero digits. The form is unique
  and nonzero-minimal, so a shift-add multiplier built from it uses
  max(nnz - 1, 0) adder stages.
*/

#pragma once

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace bespoke
{

/*! \brief One nonzero digit of a signed-digit form: (+1|-1) * 2^shift. */
struct csd_term
{
  int shift = 0;
  bool negative = false;
};

/*! \brief Canonical signed digit terms of `c`, lowest shift first.
 *
 * Uses the non-adjacent-form recurrence: while c != 0, emit
 * d = 2 - (c mod 4) when c is odd (so c - d is divisible by 4), else 0.
 */
inline std::vector<csd_term> to_csd( int64_t c )
{
  std::vector<csd_term> terms;
  int shift = 0;
  while ( c != 0 )
  {
    if ( c & 1 )
    {
      const int64_t d = 2 - ( c & 3 ); /* +1 when c % 4 == 1, -1 when c % 4 == 3 */
      terms.push_back( { shift, d < 0 } );
      c -= d;
    }
    c >>= 1;
    ++shift;
  }
  return terms;
}

/*! \brief Reconstructs the constant from its signed-digit terms. */
inline int64_t from_csd( std::vector<csd_term> const& terms )
{
  int64_t c = 0;
  for ( auto const& t : terms )
    c += ( t.negative ? -1 : 1 ) * ( int64_t{ 1 } << t.shift );
  return c;
}

/*! \brief Number of nonzero digits in the CSD form of `c`. */
inline int csd_cost( int64_t c )
{
  return static_cast<int>( to_csd( c ).size() );
}

/*! \brief Adder stages of the shift-add multiplier for `c`. */
inline int csd_adder_stages( int64_t c )
{
  const int nnz = csd_cost( c );
  return nnz > 1 ? nnz - 1 : 0;
}

} // namespace bespoke
